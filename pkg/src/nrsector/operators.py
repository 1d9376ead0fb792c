"""Generators of symmetric L-infinity-contractive semigroups on finite spaces.

A generator is a matrix ``A`` with ``(A f)_j = sum_k A[j, k] f_k`` that is
self-adjoint for the weighted pairing, positive semidefinite, and whose
semigroup ``exp(-t A)`` is a contraction on L-infinity. All exponentials go
through the Hermitian matrix ``H = D^(1/2) A D^(-1/2)`` with ``D = diag(mu)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from ._backend import pnorm_ascent_batch
from .core import INF, FiniteMeasureSpace, as_exponent, complex_gaussian
from .errors import ConstructionError, DomainError, NumericError, SamplingError, SizeError

DEFAULT_T_GRID = np.geomspace(1e-3, 1e2, 20)
SELF_ADJOINT_TOL = 1e-12
PSD_TOL = 1e-10
CONTRACTION_TOL = 1e-9


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


def linf_norm(M) -> float:
    """Exact L-infinity operator norm: the largest absolute row sum."""
    return float(np.abs(np.asarray(M)).sum(axis=1).max())


def l1_norm(M, weights) -> float:
    """Exact weighted L1 operator norm, max_k (1/mu_k) sum_j mu_j |M_jk|."""
    mu = np.asarray(weights, dtype=float)
    return float(((mu[:, None] * np.abs(np.asarray(M))).sum(axis=0) / mu).max())


def linf_log_norm(A) -> float:
    """Logarithmic L-infinity norm of -A: max_j (-Re A_jj + sum_{k != j} |A_jk|).

    ``exp(-t A)`` is an L-infinity contraction for every t >= 0 exactly when
    this is <= 0.
    """
    A = np.asarray(A)
    off = np.abs(A).sum(axis=1) - np.abs(np.diag(A))
    return float((off - np.diag(A).real).max())


def weighted_adjoint(M, weights) -> np.ndarray:
    """Adjoint for the weighted pairing: D^-1 M^H D."""
    mu = np.asarray(weights, dtype=float)
    return (np.conj(M).T * mu) / mu[:, None]


@dataclass(frozen=True)
class ValidationReport:
    self_adjoint: bool
    positive_semidefinite: bool
    linf_contractive: bool
    l1_contractive: bool
    self_adjoint_defect: float
    min_eigenvalue: float
    linf_defect: float
    l1_defect: float
    log_norm: float
    t_grid: tuple = field(repr=False)

    @property
    def valid(self) -> bool:
        return self.self_adjoint and self.positive_semidefinite and self.linf_contractive

    def as_dict(self) -> dict:
        return {
            "valid": self.valid,
            "self_adjoint": self.self_adjoint,
            "positive_semidefinite": self.positive_semidefinite,
            "linf_contractive": self.linf_contractive,
            "l1_contractive": self.l1_contractive,
            "self_adjoint_defect": self.self_adjoint_defect,
            "min_eigenvalue": self.min_eigenvalue,
            "linf_defect": self.linf_defect,
            "l1_defect": self.l1_defect,
            "log_norm": self.log_norm,
            "t_grid": list(self.t_grid),
        }


class _Spectral:
    """Eigendecomposition of the symmetrised matrix, used for all exponentials."""

    def __init__(self, A, weights):
        mu = np.asarray(weights, dtype=float)
        self.sq = np.sqrt(mu)
        H = self.sq[:, None] * A / self.sq[None, :]
        H = 0.5 * (H + np.conj(H).T)
        lam, U = np.linalg.eigh(H)
        self.raw_eigenvalues = lam
        self.eigenvalues = np.where((lam < 0) & (lam >= -PSD_TOL), 0.0, lam)
        self.U = U
        self.left = U / self.sq[:, None]
        self.right = np.conj(U).T * self.sq[None, :]

    def exp(self, z):
        return (self.left * np.exp(-z * self.eigenvalues)) @ self.right


def _check_square(matrix, space):
    A = np.asarray(matrix, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SizeError(f"generator must be a square matrix, got shape {A.shape}")
    if A.shape[0] != space.n:
        raise SizeError(f"matrix is {A.shape[0]}x{A.shape[0]}, space has {space.n} atoms")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix has non-finite entries")
    return A


def validate_generator(matrix, space: FiniteMeasureSpace, t_grid=None,
                       tol: float = CONTRACTION_TOL) -> ValidationReport:
    """Check self-adjointness, positivity and L-infinity contractivity.

    Contractivity is checked on ``t_grid`` with the exact row-sum norm and
    also through the log-norm criterion, which covers every t >= 0.
    """
    A = _check_square(matrix, space)
    mu = space.weights
    grid = DEFAULT_T_GRID if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any(grid <= 0):
        raise DomainError("validation times must be positive")

    DA = mu[:, None] * A
    scale = max(1.0, float(np.abs(DA).max()))
    sa_defect = float(np.abs(DA - np.conj(DA).T).max())
    self_adjoint = sa_defect <= SELF_ADJOINT_TOL * scale

    spec = _Spectral(A, mu)
    min_eig = float(spec.raw_eigenvalues.min())
    psd = min_eig >= -PSD_TOL

    linf_worst = -math.inf
    l1_worst = -math.inf
    for t in grid:
        T = spec.exp(t) if self_adjoint else scipy.linalg.expm(-t * A)
        linf_worst = max(linf_worst, linf_norm(T) - 1.0)
        l1_worst = max(l1_worst, l1_norm(T, mu) - 1.0)
    log_norm = linf_log_norm(A)
    log_scale = max(1.0, float(np.abs(A).max()))
    linf_ok = linf_worst <= tol and log_norm <= SELF_ADJOINT_TOL * log_scale
    return ValidationReport(
        self_adjoint=bool(self_adjoint),
        positive_semidefinite=bool(psd),
        linf_contractive=bool(linf_ok),
        l1_contractive=bool(l1_worst <= tol),
        self_adjoint_defect=sa_defect,
        min_eigenvalue=min_eig,
        linf_defect=float(linf_worst),
        l1_defect=float(l1_worst),
        log_norm=log_norm,
        t_grid=tuple(float(t) for t in grid),
    )


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """A bounded operator on a finite measure space, stored densely."""

    matrix: np.ndarray
    space: FiniteMeasureSpace

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(_check_square(self.matrix, self.space)))

    @property
    def n(self) -> int:
        return self.space.n

    def linf_norm(self) -> float:
        return linf_norm(self.matrix)

    def l1_norm(self) -> float:
        return l1_norm(self.matrix, self.space.weights)

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(weighted_adjoint(self.matrix, self.space.weights), self.space)

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return OperatorMatrix(self.matrix @ other.matrix, self.space)
        return self.matrix @ np.asarray(other)


@dataclass(frozen=True, eq=False)
class Generator:
    """A validated generator; constructing an invalid one raises ConstructionError."""

    matrix: np.ndarray
    space: FiniteMeasureSpace
    label: str = "generator"
    report: ValidationReport | None = None

    def __post_init__(self):
        A = _frozen(_check_square(self.matrix, self.space))
        object.__setattr__(self, "matrix", A)
        if self.report is None:
            object.__setattr__(self, "report", validate_generator(A, self.space))
        if not self.report.valid:
            raise ConstructionError(f"{self.label}: not a valid generator ({self.report})")

    @property
    def n(self) -> int:
        return self.space.n

    @cached_property
    def _spectral(self) -> _Spectral:
        return _Spectral(self.matrix, self.space.weights)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._spectral.eigenvalues

    def as_operator(self) -> OperatorMatrix:
        return OperatorMatrix(self.matrix, self.space)


def semigroup_at(gen: Generator, z) -> OperatorMatrix:
    """exp(-z A) for complex time z in the closed right half plane."""
    z = complex(z)
    if z.real < 0:
        raise DomainError(f"semigroup needs Re z >= 0, got {z}")
    return OperatorMatrix(gen._spectral.exp(z), gen.space)


def euler_approx(gen: Generator, t: float, n: int) -> OperatorMatrix:
    """(I + (t/n) A)^(-n), the resolvent-power approximation of exp(-t A)."""
    if t <= 0:
        raise DomainError(f"t must be positive, got {t}")
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    n = int(n)
    R = np.eye(gen.n) + (t / n) * gen.matrix
    if np.linalg.cond(R) > 1e14:
        raise NumericError("resolvent is numerically singular")
    step = np.linalg.solve(R, np.eye(gen.n))
    return OperatorMatrix(np.linalg.matrix_power(step, n), gen.space)


def _ascent_starts(n: int, restarts: int, rng: np.random.Generator) -> np.ndarray:
    # axis vectors, the constant vector, then seeded Gaussian starts
    return np.vstack([
        np.eye(n, dtype=complex),
        np.ones((1, n), dtype=complex),
        complex_gaussian(rng, (restarts, n)),
    ])


def _exact_pnorm(M, mu, p):
    if p == INF:
        return linf_norm(M)
    if p == 1:
        return l1_norm(M, mu)
    sq = np.sqrt(mu)
    return float(np.linalg.norm(sq[:, None] * M / sq[None, :], 2))


def operator_pnorm_lower_bound(op: OperatorMatrix, p, restarts: int = 8, seed=0,
                               max_iter: int = 200) -> float:
    """Weighted p-to-p operator norm: exact for p in {1, 2, inf}, else a lower bound.

    For other p the value is the best ||M f||_p over ascent runs started from
    the axis vectors, the constant vector and ``restarts`` seeded random
    vectors, so it never exceeds the true norm.
    """
    return float(operator_pnorm_lower_bounds([op], p, restarts, [seed], max_iter)[0])


def operator_pnorm_lower_bounds(ops, p, restarts: int = 8, seeds=None,
                                max_iter: int = 200) -> np.ndarray:
    """operator_pnorm_lower_bound for many operators on one space, one seed each.

    Entry b equals operator_pnorm_lower_bound(ops[b], p, restarts, seeds[b]);
    batching only removes per-call overhead.
    """
    p = as_exponent(p)
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    ops = list(ops)
    if not ops:
        return np.empty(0)
    space = ops[0].space
    if any(op.space != space for op in ops):
        raise DomainError("operators must share one measure space")
    seeds = [0] * len(ops) if seeds is None else list(seeds)
    if len(seeds) != len(ops):
        raise DomainError("need one seed per operator")
    mu = space.weights
    if p in (1.0, 2.0, INF):
        return np.array([_exact_pnorm(np.asarray(op.matrix), mu, p) for op in ops])
    Ms = np.stack([np.asarray(op.matrix) for op in ops])
    F0 = np.stack([_ascent_starts(space.n, restarts, np.random.default_rng(s)) for s in seeds])
    return pnorm_ascent_batch(Ms, mu, p, F0, max_iter)


def make_lambda_family(lam) -> Generator:
    """The 2x2 generator [[1, -conj(lam)], [-lam, 1]] for unimodular lam."""
    lam = complex(lam)
    if abs(abs(lam) - 1.0) > 1e-12:
        raise DomainError(f"|lambda| must be 1, got {abs(lam)}")
    lam = lam / abs(lam)
    A = np.array([[1.0, -np.conj(lam)], [-lam, 1.0]])
    return Generator(A, FiniteMeasureSpace.uniform(2), label=f"lambda:{lam.real:g},{lam.imag:g}")


def paper_generator() -> Generator:
    """[[1, -1], [-1, 1]] on two unit atoms."""
    return Generator(np.array([[1.0, -1.0], [-1.0, 1.0]]), FiniteMeasureSpace.uniform(2),
                     label="paper2x2")


def make_graph_laplacian(W, d, space: FiniteMeasureSpace, label: str = "laplacian") -> Generator:
    """A = diag(d) - W (off-diagonal) for nonnegative, mu-symmetric, dominated W.

    The diagonal of W is ignored. The resulting semigroup is positivity
    preserving and sub-Markovian.
    """
    W = np.array(W, dtype=float)
    d = np.asarray(d, dtype=float).ravel()
    n = space.n
    if W.shape != (n, n) or d.size != n:
        raise SizeError(f"W must be {n}x{n} and d of length {n}")
    np.fill_diagonal(W, 0.0)
    if np.any(W < 0) or np.any(d < 0):
        raise ConstructionError("weights W and diagonal d must be nonnegative")
    mu = space.weights
    S = mu[:, None] * W
    if np.abs(S - S.T).max() > 1e-12 * max(1.0, float(np.abs(S).max())):
        raise ConstructionError("W is not symmetric with respect to the measure")
    rows = W.sum(axis=1)
    bad = np.flatnonzero(rows > d * (1 + 1e-12) + 1e-15)
    if bad.size:
        j = int(bad[0])
        raise ConstructionError(
            f"row {j} violates diagonal dominance: sum_k W[{j},k] = {rows[j]:g} > d[{j}] = {d[j]:g}")
    A = np.diag(d) - W
    return Generator(A, space, label=label)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar unitary from the QR factorisation of a complex Gaussian matrix."""
    Z = complex_gaussian(rng, (n, n)) / math.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_generator(n: int, seed, positivity_preserving: bool = False,
                     max_tries: int = 10000) -> Generator:
    """Seeded random generator of size n.

    Positivity-preserving draws are dominated graph Laplacians; the others
    are D^(-1/2) Q diag(s) Q^H D^(1/2) with Haar Q and s >= 0, resampled
    until the semigroup is an L-infinity contraction.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    n = int(n)
    rng = np.random.default_rng(seed)
    mu = rng.uniform(0.5, 2.0, n)
    space = FiniteMeasureSpace(mu)
    if positivity_preserving:
        S = rng.uniform(0.0, 1.0, (n, n)) * (rng.random((n, n)) < 0.7)
        S = np.triu(S, 1)
        S = S + S.T
        W = S / mu[:, None]
        slack = rng.uniform(0.0, 0.5, n) * (rng.random(n) < 0.5)
        d = W.sum(axis=1) + slack
        return make_graph_laplacian(W, d, space, label=f"random-pp:{n}:{seed}")
    sq = np.sqrt(mu)
    for _ in range(max_tries):
        Q = random_unitary(rng, n)
        s = rng.uniform(0.0, 2.0, n)
        H = (Q * s) @ np.conj(Q).T
        A = H * sq[None, :] / sq[:, None]
        if linf_log_norm(A) > 0:
            continue
        report = validate_generator(A, space)
        if report.valid:
            return Generator(A, space, label=f"random:{n}:{seed}", report=report)
    raise SamplingError(f"no L-infinity contractive generator of size {n} after {max_tries} tries")


def standard_fleet(seed: int = 0, max_n: int = 8) -> list[Generator]:
    """The generator fleet used by the verification suites.

    25 random graph Laplacians, 24 random validated generators (not
    positivity preserving) and the 2x2 family at lambda = 1, i, -1, e^(i pi/4).
    Sizes cycle through 2..max_n.
    """
    sizes = list(range(2, max_n + 1))
    fleet = [random_generator(sizes[i % len(sizes)], seed * 1000 + i, positivity_preserving=True)
             for i in range(25)]
    fleet += [random_generator(sizes[i % len(sizes)], seed * 1000 + 100 + i)
              for i in range(24)]
    fleet += [make_lambda_family(lam) for lam in (1, 1j, -1, complex(np.exp(1j * np.pi / 4)))]
    return fleet
