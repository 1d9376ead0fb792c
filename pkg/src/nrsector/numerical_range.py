"""The L^p numerical-range form <A f, F_p(f)> and its time-discrete variant."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ._backend import form_values
from .core import (
    DEFAULT_TOL,
    CVec,
    Sector,
    abs_args,
    complex_gaussian,
    duality_values,
    in_sector,
    sector_angle,
    weighted_pairing,
    weighted_pnorm,
)
from .errors import DomainError
from .operators import Generator, semigroup_at
from .scalar_lemmas import AngleReport, _check_p

ARG_FLOOR = 1e-12
# arg(<A f, F_p(f)>) moves by about eps * |A| / |value| under rounding of A,
# so the optimiser only trusts values above this multiple of max |A_jk|
FORM_FLOOR = 1e-6
CAUCHY_FRACTION = 0.1


def _entries(gen: Generator, f) -> np.ndarray:
    if isinstance(f, CVec):
        if f.space != gen.space:
            raise DomainError("vector and generator live on different spaces")
        f = f.entries
    f = np.asarray(f, dtype=complex).ravel()
    if f.size != gen.n:
        raise DomainError(f"vector has {f.size} entries, generator acts on {gen.n}")
    return f


def _form(M, mu, f, p, normalize):
    nrm = weighted_pnorm(f, p, mu)
    if nrm == 0.0:
        raise DomainError("the form is undefined at f = 0")
    if normalize:
        f = f / nrm
    return weighted_pairing(M @ f, duality_values(f, p), mu)


def form_value(gen: Generator, f, p) -> complex:
    """<A f, F_p(f)> after scaling f to unit p-norm."""
    p = _check_p(p)
    return _form(np.asarray(gen.matrix), gen.space.weights, _entries(gen, f), p, True)


def difference_form(gen: Generator, t: float, f, p, normalize: bool = True) -> complex:
    """<(I - exp(-t A)) f, F_p(f)>, by default at unit p-norm."""
    p = _check_p(p)
    if t <= 0:
        raise DomainError(f"t must be positive, got {t}")
    M = np.eye(gen.n) - semigroup_at(gen, t).matrix
    return _form(M, gen.space.weights, _entries(gen, f), p, normalize)


@dataclass(frozen=True, eq=False)
class RangeSample:
    values: np.ndarray
    p: float
    generator_id: str
    max_abs_arg: float
    seed: int
    sample_count: int
    outside: int = 0

    def as_dict(self) -> dict:
        return {
            "generator_id": self.generator_id,
            "p": self.p,
            "seed": self.seed,
            "sample_count": self.sample_count,
            "max_abs_arg": self.max_abs_arg,
            "sector_angle": sector_angle(self.p),
            "outside": self.outside,
            "values": [[float(v.real), float(v.imag)] for v in self.values],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im", "abs", "arg"])
        for v in self.values:
            w.writerow([repr(float(v.real)), repr(float(v.imag)), repr(float(abs(v))),
                        repr(float(np.angle(v)))])
        return buf.getvalue()


def random_vectors(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    """Complex Gaussian rows, with a tenth of them complex Cauchy to hit near-zero entries."""
    X = complex_gaussian(rng, (count, n))
    k = int(round(CAUCHY_FRACTION * count))
    if k:
        X[-k:] = rng.standard_cauchy((k, n)) + 1j * rng.standard_cauchy((k, n))
    zero = np.abs(X).max(axis=1) == 0
    X[zero, 0] = 1.0
    return X


def sample_range(gen: Generator, p, n_samples: int, seed=0, generator_id: str | None = None,
                 tol: float = DEFAULT_TOL) -> RangeSample:
    """Evaluate the form at n_samples seeded random vectors."""
    p = _check_p(p)
    if n_samples < 1:
        raise DomainError("need at least one sample")
    rng = np.random.default_rng(seed)
    X = random_vectors(rng, n_samples, gen.n)
    vals = form_values(np.asarray(gen.matrix), gen.space.weights, X, p)
    vals.setflags(write=False)
    outside = int(np.count_nonzero(~np.atleast_1d(in_sector(vals, Sector(sector_angle(p)), tol))))
    return RangeSample(
        values=vals,
        p=p,
        generator_id=generator_id or gen.label,
        max_abs_arg=float(abs_args(vals, ARG_FLOOR).max()),
        seed=int(seed) if seed is not None else 0,
        sample_count=int(n_samples),
        outside=outside,
    )


def _params_to_vec(x, n):
    f = np.empty(n, dtype=complex)
    f[0] = x[0]
    f[1:] = x[1::2] + 1j * x[2::2]
    return f


def _vec_to_params(f):
    # fix the global phase so the first entry is real
    k = int(np.argmax(np.abs(f)))
    f = f * np.exp(-1j * np.angle(f[0] if abs(f[0]) > 0 else f[k]))
    x = np.empty(2 * f.size - 1)
    x[0] = f[0].real
    x[1::2] = f[1:].real
    x[2::2] = f[1:].imag
    return x


def max_arg_search(gen: Generator, p, restarts: int = 8, seed=0, maxfev: int = 1500,
                   screen: int = 256) -> AngleReport:
    """Maximise |arg form_value(gen, f, p)| over f.

    The form is invariant under positive scaling and global phase, so f is
    parametrised by 2n - 1 reals (first entry real). ``screen`` random vectors
    are ranked and the best ``restarts`` seed Nelder-Mead runs.
    """
    p = _check_p(p)
    if restarts < 1:
        raise DomainError("need at least one restart")
    A = np.asarray(gen.matrix)
    mu = gen.space.weights
    n = gen.n
    floor = FORM_FLOOR * max(1.0, float(np.abs(A).max()))
    rng = np.random.default_rng(seed)
    X = random_vectors(rng, max(screen, restarts), n)
    vals = form_values(A, mu, X, p)
    ang = abs_args(vals, floor)
    order = np.argsort(-ang, kind="stable")[:restarts]

    def objective(x):
        v = form_values(A, mu, _params_to_vec(x, n)[None, :], p)[0]
        if not abs(v) > floor:
            return 0.0
        return -abs(math.atan2(v.imag, v.real))

    best, best_f = float(ang[order[0]]), X[order[0]]
    opts = {"maxfev": maxfev, "xatol": 1e-12, "fatol": 1e-15, "adaptive": n > 3}
    if n == 1:
        # a single atom: f is a multiple of the indicator and the form is A_11 >= 0
        order = order[:0]
    for i in order:
        res = minimize(objective, _vec_to_params(X[i]), method="Nelder-Mead", options=opts)
        if -res.fun > best:
            best, best_f = float(-res.fun), _params_to_vec(res.x, n)
    best_f = best_f / weighted_pnorm(best_f, p, mu)
    target = sector_angle(p)
    return AngleReport(
        best_angle=best,
        attaining_input=tuple(complex(v) for v in best_f),
        target=target,
        gap=target - best,
        details={"value": form_value(gen, best_f, p), "restarts": int(restarts),
                 "generator_id": gen.label},
    )
