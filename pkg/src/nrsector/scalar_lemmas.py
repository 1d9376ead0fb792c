"""Scalar and planar machinery behind the sector bound.

* ``lp_form`` is the two-point form (w - z) * conj(F_p(w) - F_p(z)).
* ``jacobian_F`` is the real Jacobian of F_p viewed as a map of the plane.
* ``quad_form_value`` / ``lemma3_sup_angle`` describe the angles of
  h * conj(A h) for a symmetric positive 2x2 matrix A.
* ``scalar_sharpness_search`` pushes |arg lp_form| up to the sector angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from ._backend import lp_form_many
from .core import (
    DEFAULT_TOL,
    INF,
    Sector,
    as_exponent,
    complex_gaussian,
    duality_values,
    in_sector,
    sector_angle,
)
from .errors import DomainError

# below this modulus arg(value) is dominated by rounding, so optimisers ignore it
OPT_FLOOR = 1e-10


@dataclass(frozen=True)
class AngleReport:
    best_angle: float
    attaining_input: tuple
    target: float
    gap: float
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "best_angle": self.best_angle,
            "attaining_input": [_jsonable(x) for x in self.attaining_input],
            "target": self.target,
            "gap": self.gap,
            "details": {k: _jsonable(v) for k, v in self.details.items()},
        }


def _jsonable(x):
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


def _check_p(p) -> float:
    p = as_exponent(p)
    if not 1 < p < INF:
        raise DomainError(f"need 1 < p < inf, got {p}")
    return p


def lp_form(z, w, p):
    """(w - z) * conj(F_p(w) - F_p(z)); scalars in, scalar out, arrays elementwise."""
    p = _check_p(p)
    if np.ndim(z) == 0 and np.ndim(w) == 0:
        z, w = complex(z), complex(w)
        Fz = z * abs(z) ** (p - 2.0) if abs(z) >= 1e-300 else 0j
        Fw = w * abs(w) ** (p - 2.0) if abs(w) >= 1e-300 else 0j
        return (w - z) * (Fw - Fz).conjugate()
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    return lp_form_many(z.ravel(), w.ravel(), p).reshape(z.shape)


@dataclass(frozen=True)
class JacobianData:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns: unit y-perp, unit y


def jacobian_F(y, p) -> JacobianData:
    """Jacobian |y|^(p-2) (I + (p-2) y y^T / |y|^2) of F_p at y != 0.

    Eigenpairs: |y|^(p-2) on y-perp and (p-1)|y|^(p-2) on y.
    """
    p = _check_p(p)
    if isinstance(y, complex) or np.iscomplexobj(y):
        y = np.array([complex(y).real, complex(y).imag])
    y = np.asarray(y, dtype=float).ravel()
    if y.size != 2:
        raise DomainError("y must be a point of the plane")
    r = math.hypot(y[0], y[1])
    if r == 0.0:
        raise DomainError("F_p is not differentiable at 0")
    s = r ** (p - 2.0)
    u = y / r
    matrix = s * (np.eye(2) + (p - 2.0) * np.outer(u, u))
    perp = np.array([-u[1], u[0]])
    return JacobianData(
        matrix=matrix,
        eigenvalues=np.array([s, (p - 1.0) * s]),
        eigenvectors=np.column_stack([perp, u]),
    )


def fd_jacobian(y, p, step: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian of F_p as a map R^2 -> R^2."""
    p = _check_p(p)
    y = np.asarray(y, dtype=float).ravel()
    J = np.empty((2, 2))
    for k in range(2):
        e = np.zeros(2)
        e[k] = step
        plus = duality_values(complex(*(y + e)), p)
        minus = duality_values(complex(*(y - e)), p)
        d = (plus - minus) / (2 * step)
        J[:, k] = [d.real, d.imag]
    return J


def quad_form_value(h, A) -> complex:
    """h * conj(A h) with h read as a real 2-vector; its arg is the signed angle from A h to h."""
    A = np.asarray(A, dtype=float)
    if A.shape != (2, 2):
        raise DomainError("A must be 2x2")
    if abs(A[0, 1] - A[1, 0]) > 1e-12 * max(1.0, float(np.abs(A).max())):
        raise DomainError("A must be symmetric")
    h = complex(h)
    v = A @ np.array([h.real, h.imag])
    return h * complex(v[0], -v[1])


def lemma3_bound(lam: float) -> float:
    return math.asin(abs(lam - 1.0) / (lam + 1.0))


def _alpha(x, lam):
    # signed angle from (1, lam x) to (1, x)
    return np.angle((1 + 1j * x) * (1 - 1j * lam * x))


def lemma3_sup_angle(lam: float, x_grid_size: int = 10_000, refine: bool = True) -> AngleReport:
    """Largest |angle(A (1,x), (1,x))| for A = diag(1, lam) over a tan-spaced grid.

    Also checks sin(alpha_x) = sin(a + b) (1 - lam)/(1 + lam) with
    a = arctan x, b = arctan(lam x) at every grid point; the worst residual is
    in ``details["identity_residual"]``.
    """
    lam = float(lam)
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    if x_grid_size < 1:
        raise DomainError("grid must have at least one point")
    theta = -math.pi / 2 + math.pi * (np.arange(x_grid_size) + 0.5) / x_grid_size
    x = np.tan(theta)
    alpha = _alpha(x, lam)
    a, b = np.arctan(x), np.arctan(lam * x)
    rhs = np.sin(a + b) * (1.0 - lam) / (1.0 + lam)
    residual = float(np.abs(np.sin(alpha) - rhs).max())

    i = int(np.argmax(np.abs(alpha)))
    best, best_x = float(abs(alpha[i])), float(x[i])
    if refine and best > 0:
        step = math.pi / x_grid_size
        lo, hi = max(theta[i] - step, -math.pi / 2 + 1e-12), min(theta[i] + step, math.pi / 2 - 1e-12)
        res = minimize_scalar(lambda th: -abs(float(_alpha(math.tan(th), lam))),
                              bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        if -res.fun > best:
            best, best_x = float(-res.fun), math.tan(res.x)
    target = lemma3_bound(lam)
    return AngleReport(
        best_angle=best,
        attaining_input=(best_x,),
        target=target,
        gap=target - best,
        details={"identity_residual": residual, "grid_size": int(x_grid_size)},
    )


def _multistart(objective, starts, options):
    best_val, best_x = math.inf, None
    for x0 in starts:
        res = minimize(objective, x0, method="Nelder-Mead", options=options)
        if res.fun < best_val:
            best_val, best_x = float(res.fun), np.asarray(res.x)
    return -best_val, best_x


def scalar_sharpness_search(p, restarts: int = 64, seed=0, maxfev: int = 600) -> AngleReport:
    """Maximise |arg lp_form(z, w, p)| by seeded multistart Nelder-Mead.

    Rotation and scaling invariance let z = 1 and w = exp(s + i beta). The
    derivative route, maximising |arg(h conj(F'(y) h))| over unit y and h, is
    run alongside and reported in ``details``.
    """
    p = _check_p(p)
    target = sector_angle(p)
    rng = np.random.default_rng(seed)
    opts = {"maxfev": maxfev, "xatol": 1e-12, "fatol": 1e-15}

    def two_point(x):
        v = lp_form(1.0, cmath_exp(x[0], x[1]), p)
        return 0.0 if abs(v) <= OPT_FLOOR else -abs(math.atan2(v.imag, v.real))

    starts = np.column_stack([rng.normal(0.0, 0.5, restarts), rng.uniform(-math.pi, math.pi, restarts)])
    best, xb = _multistart(two_point, starts, opts)
    w_best = cmath_exp(xb[0], xb[1])

    def limit(x):
        J = jacobian_F([math.cos(x[0]), math.sin(x[0])], p).matrix
        h = np.array([math.cos(x[1]), math.sin(x[1])])
        v = J @ h
        return -abs(math.atan2(v[0] * h[1] - v[1] * h[0], v @ h))

    lstarts = rng.uniform(-math.pi, math.pi, (restarts, 2))
    lbest, lx = _multistart(limit, lstarts, opts)
    return AngleReport(
        best_angle=best,
        attaining_input=(1.0 + 0j, w_best),
        target=target,
        gap=target - best,
        details={
            "limit_route_angle": lbest,
            "limit_route_input": (math.cos(lx[0]), math.sin(lx[0]), math.cos(lx[1]), math.sin(lx[1])),
            "restarts": int(restarts),
        },
    )


def cmath_exp(s: float, beta: float) -> complex:
    return math.exp(s) * complex(math.cos(beta), math.sin(beta))


@dataclass(frozen=True)
class InclusionResult:
    p: float
    samples: int
    max_angle: float
    target: float
    violations: int
    worst_excess: float
    collinear_min_real: float
    collinear_max_imag: float

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__} | {"passed": self.passed}


def lemma2_inclusion(p, samples: int = 100_000, seed=0, tol: float = DEFAULT_TOL) -> InclusionResult:
    """Sample (z, w) pairs and check lp_form(z, w, p) lies in the sector.

    Half the pairs are independent complex Gaussians, a quarter are
    near-diagonal (w = z (1 + small h)) where the bound is nearly attained,
    and a quarter are collinear through the origin, where the form must be
    real and nonnegative.
    """
    p = _check_p(p)
    rng = np.random.default_rng(seed)
    n_far = samples - 2 * (samples // 4)
    n_near = samples // 4
    n_col = samples // 4
    z = complex_gaussian(rng, n_far)
    w = complex_gaussian(rng, n_far)
    zn = complex_gaussian(rng, n_near)
    wn = zn * (1 + 10.0 ** rng.uniform(-4, -1, n_near) * np.exp(2j * math.pi * rng.random(n_near)))
    zz = np.concatenate([z, zn])
    ww = np.concatenate([w, wn])
    vals = lp_form(zz, ww, p)
    sector = Sector(sector_angle(p))
    inside = in_sector(vals, sector, tol)
    args = np.abs(np.angle(vals))
    args[np.abs(vals) <= 1e-12] = 0.0
    excess = float((args - sector.angle).max(initial=-math.inf))

    # z and w = -s z with s >= 0 put the origin on the segment [z, w]
    zc = complex_gaussian(rng, n_col)
    wc = -rng.uniform(0.0, 3.0, n_col) * zc
    cvals = lp_form(zc, wc, p) if n_col else np.zeros(0, dtype=complex)
    cmin = float(cvals.real.min(initial=math.inf))
    cimag = float(np.abs(cvals.imag / np.maximum(np.abs(cvals), 1e-300)).max(initial=0.0))
    violations = int(np.count_nonzero(~inside)) + int(np.count_nonzero(cvals.real < -1e-12))
    return InclusionResult(
        p=p,
        samples=int(samples),
        max_angle=float(args.max(initial=0.0)),
        target=sector.angle,
        violations=violations,
        worst_excess=excess,
        collinear_min_real=cmin,
        collinear_max_imag=cimag,
    )


@dataclass(frozen=True)
class JacobianCheck:
    samples: int
    max_fd_error: float
    max_eigen_residual: float

    def as_dict(self) -> dict:
        return {"samples": self.samples, "max_fd_error": self.max_fd_error,
                "max_eigen_residual": self.max_eigen_residual}


def jacobian_check(samples: int = 1000, seed=0, p=None, step: float = 1e-6) -> JacobianCheck:
    """Compare jacobian_F with central differences at random (y, p).

    y is drawn with |y| in [e^-1, e]; p is uniform in (1.05, 10) unless given.
    Errors are relative to the largest Jacobian entry; eigen residuals are
    |F'(y) v - lambda v| / lambda.
    """
    rng = np.random.default_rng(seed)
    worst_fd = worst_eig = 0.0
    for _ in range(samples):
        r, phi = math.exp(rng.uniform(-1.0, 1.0)), rng.uniform(-math.pi, math.pi)
        y = np.array([r * math.cos(phi), r * math.sin(phi)])
        q = float(rng.uniform(1.05, 10.0)) if p is None else _check_p(p)
        jd = jacobian_F(y, q)
        fd = fd_jacobian(y, q, step)
        worst_fd = max(worst_fd, float(np.abs(fd - jd.matrix).max() / np.abs(jd.matrix).max()))
        for lam, v in zip(jd.eigenvalues, jd.eigenvectors.T):
            worst_eig = max(worst_eig, float(np.abs(jd.matrix @ v - lam * v).max() / lam))
    return JacobianCheck(int(samples), worst_fd, worst_eig)
