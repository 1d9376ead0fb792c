"""Finite measure spaces, weighted L^p norms, the duality map and sectors.

Functions come in two flavours: the public ones take :class:`CVec` values
bound to a :class:`FiniteMeasureSpace`, and the ``weighted_*`` helpers take
bare arrays plus a weight vector and are what the rest of the package uses
internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, SizeError

INF = math.inf
"""The exponent p = infinity (weights are ignored by the sup norm)."""

DEFAULT_TOL = 1e-9
ZERO_ENTRY = 1e-300


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def as_exponent(p) -> float:
    """Parse an exponent; accepts floats, ints, ``math.inf`` and ``"inf"``."""
    if isinstance(p, str):
        if p.strip().lower() in {"inf", "infinity", "oo"}:
            return INF
        p = float(p)
    p = float(p)
    if math.isnan(p):
        raise DomainError("exponent is NaN")
    return p


def dual_exponent(p: float) -> float:
    p = as_exponent(p)
    if p < 1:
        raise DomainError(f"exponent must be >= 1, got {p}")
    if p == 1:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True, eq=False)
class FiniteMeasureSpace:
    """Atoms 1..n carrying strictly positive, finite masses."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size < 1:
            raise DomainError("a measure space needs at least one atom")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise DomainError(f"atom weights must be positive and finite, got {w}")
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def uniform(cls, n: int, mass: float = 1.0) -> "FiniteMeasureSpace":
        return cls(np.full(n, float(mass)))

    @property
    def n(self) -> int:
        return self.weights.size

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, FiniteMeasureSpace):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.weights, other.weights))

    def __hash__(self):
        return hash(self.weights.tobytes())

    def __repr__(self):
        return f"FiniteMeasureSpace(weights={self.weights.tolist()})"

    def vector(self, entries) -> "CVec":
        return CVec(entries, self)

    def indicator(self, atoms) -> "CVec":
        e = np.zeros(self.n, dtype=complex)
        e[list(atoms)] = 1.0
        return CVec(e, self)


@dataclass(frozen=True, eq=False)
class CVec:
    """A complex function on the atoms of ``space``."""

    entries: np.ndarray
    space: FiniteMeasureSpace

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex).ravel()
        if e.size != self.space.n:
            raise SizeError(f"vector has {e.size} entries, space has {self.space.n} atoms")
        object.__setattr__(self, "entries", _frozen(e))

    def __len__(self):
        return self.entries.size

    def __mul__(self, scalar):
        return CVec(self.entries * scalar, self.space)

    __rmul__ = __mul__

    def __repr__(self):
        return f"CVec({self.entries.tolist()}, weights={self.space.weights.tolist()})"


def _same_space(f: CVec, g: CVec) -> None:
    if f.space.n != g.space.n or not np.array_equal(f.space.weights, g.space.weights):
        raise SizeError("vectors live on different measure spaces")


def _fsum_complex(values) -> complex:
    values = np.asarray(values, dtype=complex)
    return complex(math.fsum(values.real), math.fsum(values.imag))


def weighted_pairing(f, g, weights) -> complex:
    """sum_j f_j conj(g_j) mu_j, accumulated with exact (fsum) summation."""
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    if f.shape != g.shape or f.shape[-1] != len(weights):
        raise SizeError(f"shape mismatch: {f.shape}, {g.shape}, {len(weights)} weights")
    return _fsum_complex(f * np.conj(g) * np.asarray(weights, dtype=float))


def weighted_pnorm(f, p, weights) -> float:
    p = as_exponent(p)
    if p < 1:
        raise DomainError(f"p-norm needs p >= 1, got {p}")
    a = np.abs(np.asarray(f, dtype=complex))
    if a.size == 0:
        return 0.0
    top = float(a.max())
    if p == INF or top == 0.0:
        return top
    # scale by the largest entry so |f|^p cannot overflow or underflow
    s = math.fsum((a / top) ** p * np.asarray(weights, dtype=float))
    return top * s ** (1.0 / p)


def duality_values(z, p):
    """Entrywise F_p(z) = z |z|^(p-2), with F_p(0) = 0."""
    z = np.asarray(z, dtype=complex)
    a = np.abs(z)
    out = np.zeros_like(z)
    nz = a >= ZERO_ENTRY
    out[nz] = z[nz] * a[nz] ** (p - 2.0)
    return out


def pairing(f: CVec, g: CVec) -> complex:
    """The sesquilinear pairing <f, g> = integral of f * conj(g) d mu."""
    _same_space(f, g)
    return weighted_pairing(f.entries, g.entries, f.space.weights)


def p_norm(f: CVec, p) -> float:
    return weighted_pnorm(f.entries, p, f.space.weights)


def normalize(f: CVec, p) -> CVec:
    nrm = p_norm(f, p)
    if nrm == 0.0:
        raise DomainError("cannot normalise the zero vector")
    return CVec(f.entries / nrm, f.space)


def duality_map(f: CVec, p) -> CVec:
    """Apply F_p entrywise. For ||f||_p = 1 the result has unit p'-norm and <f, F_p(f)> = 1."""
    p = as_exponent(p)
    if not 1 < p < INF:
        raise DomainError(f"duality map needs 1 < p < inf, got {p}")
    return CVec(duality_values(f.entries, p), f.space)


def sector_angle(p) -> float:
    """Opening angle arcsin|1 - 2/p| of the optimal numerical-range sector."""
    p = as_exponent(p)
    if not 1 < p < INF:
        raise DomainError(f"sector angle needs 1 < p < inf, got {p}")
    return math.asin(abs(1.0 - 2.0 / p))


def sector_angle_arctan(p) -> float:
    """The same angle written as arctan(|p - 2| / (2 sqrt(p - 1)))."""
    p = as_exponent(p)
    if not 1 < p < INF:
        raise DomainError(f"sector angle needs 1 < p < inf, got {p}")
    return math.atan(abs(p - 2.0) / (2.0 * math.sqrt(p - 1.0)))


def contraction_angle(p) -> float:
    """Half-opening arccos|1 - 2/p| of the sector where T_p(z) stays contractive."""
    p = as_exponent(p)
    if not 1 < p < INF:
        raise DomainError(f"contraction angle needs 1 < p < inf, got {p}")
    return math.acos(abs(1.0 - 2.0 / p))


@dataclass(frozen=True)
class Sector:
    """Closed sector {|arg z| <= angle} together with the origin."""

    angle: float

    def __post_init__(self):
        a = float(self.angle)
        if not 0.0 <= a <= math.pi / 2 + 1e-15:
            raise DomainError(f"sector angle must lie in [0, pi/2], got {a}")
        object.__setattr__(self, "angle", min(a, math.pi / 2))

    @classmethod
    def for_exponent(cls, p) -> "Sector":
        return cls(sector_angle(p))

    def contains(self, z, tol: float = DEFAULT_TOL):
        return in_sector(z, self, tol)


def in_sector(z, sector: Sector, tol: float = DEFAULT_TOL):
    """Tolerant membership test; works elementwise on arrays.

    Values with |z| <= tol count as the origin because arg is unstable there.
    """
    if tol < 0:
        raise DomainError("tolerance must be nonnegative")
    z = np.asarray(z, dtype=complex)
    near_zero = np.abs(z) <= tol
    inside = (z.real >= -tol) & (np.abs(np.angle(z)) <= sector.angle + tol)
    res = near_zero | inside
    return bool(res) if res.ndim == 0 else res


def abs_args(values, floor: float = 1e-12) -> np.ndarray:
    """|arg v| for each value, with values of modulus <= floor mapped to 0."""
    v = np.asarray(values, dtype=complex)
    out = np.abs(np.angle(v))
    out[np.abs(v) <= floor] = 0.0
    return out


def complex_gaussian(rng: np.random.Generator, size) -> np.ndarray:
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


def as_weights(space_or_weights: FiniteMeasureSpace | Sequence[float]) -> np.ndarray:
    if isinstance(space_or_weights, FiniteMeasureSpace):
        return space_or_weights.weights
    return FiniteMeasureSpace(space_or_weights).weights
