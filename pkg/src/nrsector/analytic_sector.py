"""Contractivity of T_p(z) = exp(-z A) along rays z = r e^(i theta).

Inside |theta| <= arccos|1 - 2/p| the semigroup should stay an L^p
contraction. Norms for p outside {1, 2, inf} are only lower bounds, so what
happens outside that sector is reported, never asserted.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from ._parallel import pmap, thread_count
from .core import contraction_angle
from .errors import DomainError
from .operators import Generator, operator_pnorm_lower_bounds, semigroup_at
from .scalar_lemmas import _check_p

DEFAULT_THETAS = np.linspace(0.0, math.pi / 2 - 1e-3, 32)
DEFAULT_RADII = (0.1, 1.0, 10.0)
INSIDE_TOL = 1e-8
INSIDE_MARGIN = 1e-6


@dataclass(frozen=True, eq=False)
class RaySweep:
    p: float
    theta_grid: np.ndarray
    radius_grid: np.ndarray
    norm_estimates: np.ndarray  # [theta index, radius index]
    critical_angle: float
    generator_id: str = ""

    @property
    def inside(self) -> np.ndarray:
        """Grid angles at least INSIDE_MARGIN inside the contraction sector."""
        return self.theta_grid <= self.critical_angle - INSIDE_MARGIN

    @property
    def max_inside(self) -> float:
        est = self.norm_estimates[self.inside]
        return float(est.max()) if est.size else -math.inf

    @property
    def passed(self) -> bool:
        return self.max_inside <= 1.0 + INSIDE_TOL

    def outside_exceedances(self) -> list[tuple[float, float, float]]:
        """(theta, r, estimate) outside the sector where the estimate exceeds 1."""
        out = []
        for i, th in enumerate(self.theta_grid):
            if th <= self.critical_angle:
                continue
            for k, r in enumerate(self.radius_grid):
                if self.norm_estimates[i, k] > 1.0 + INSIDE_TOL:
                    out.append((float(th), float(r), float(self.norm_estimates[i, k])))
        return out

    def as_dict(self) -> dict:
        return {
            "generator_id": self.generator_id,
            "p": self.p,
            "critical_angle": self.critical_angle,
            "theta_grid": self.theta_grid.tolist(),
            "radius_grid": self.radius_grid.tolist(),
            "norm_estimates": self.norm_estimates.tolist(),
            "max_inside": self.max_inside,
            "outside_exceedances": self.outside_exceedances(),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "radius", "norm_estimate", "inside_sector"])
        for i, th in enumerate(self.theta_grid):
            for k, r in enumerate(self.radius_grid):
                w.writerow([repr(float(th)), repr(float(r)), repr(float(self.norm_estimates[i, k])),
                            int(th <= self.critical_angle)])
        return buf.getvalue()


def contraction_sweep(gen: Generator, p, theta_grid=None, radius_grid=None, restarts: int = 4,
                      seed=0) -> RaySweep:
    """Lower-bound ||exp(-r e^(i theta) A)||_{p->p} over a polar grid."""
    p = _check_p(p)
    thetas = DEFAULT_THETAS if theta_grid is None else np.asarray(theta_grid, dtype=float)
    radii = np.asarray(DEFAULT_RADII if radius_grid is None else radius_grid, dtype=float)
    if np.any(thetas < 0) or np.any(thetas >= math.pi / 2):
        raise DomainError("ray angles must lie in [0, pi/2)")
    if np.any(radii <= 0):
        raise DomainError("radii must be positive")
    base = np.random.SeedSequence(seed)
    seeds = base.spawn(thetas.size * radii.size)  # one stream per grid point, row-major
    ops = [semigroup_at(gen, r * complex(math.cos(th), math.sin(th))) for th in thetas for r in radii]
    chunks = np.array_split(np.arange(len(ops)), max(1, min(thread_count(), len(ops))))

    def estimate(chunk):
        return operator_pnorm_lower_bounds([ops[j] for j in chunk], p, restarts=restarts,
                                           seeds=[seeds[j] for j in chunk])

    est = np.concatenate(pmap(estimate, chunks)).reshape(thetas.size, radii.size)
    return RaySweep(
        p=p,
        theta_grid=thetas,
        radius_grid=radii,
        norm_estimates=est,
        critical_angle=contraction_angle(p),
        generator_id=gen.label,
    )
