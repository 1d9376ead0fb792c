"""Acceptance suite: one test per criterion, each with its tolerance and time budget.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script; either
way one PASS/FAIL line is printed per criterion.
"""

import math
import sys
import time

import numpy as np
import pytest

from nrsector.analytic_sector import contraction_sweep
from nrsector.certificate import Partition, build_certificate, compress, reduction_sides
from nrsector.core import Sector, in_sector, sector_angle, sector_angle_arctan, weighted_pnorm
from nrsector.numerical_range import max_arg_search, sample_range
from nrsector.operators import euler_approx, paper_generator, random_generator, semigroup_at, standard_fleet
from nrsector.scalar_lemmas import (
    jacobian_check,
    lemma2_inclusion,
    lemma3_sup_angle,
    scalar_sharpness_search,
)

pytestmark = pytest.mark.acceptance

P_GRID = (1.1, 1.5, 2.0, 3.0, 4.0, 10.0)
RESULTS = {}

_FLEET = None


def fleet():
    global _FLEET
    if _FLEET is None:
        _FLEET = standard_fleet(seed=0)
    return _FLEET


def c01_inclusion():
    worst, bad = -math.inf, 0
    for p in P_GRID:
        r = lemma2_inclusion(p, samples=100_000, seed=0, tol=1e-9)
        bad += r.violations
        worst = max(worst, r.max_angle - r.target)
    return bad == 0, f"violations={bad} worst angle excess={worst:.2e}"


def c02_scalar_sharpness():
    gaps = [scalar_sharpness_search(p, seed=0).gap for p in (1.5, 3.0, 4.0, 10.0)]
    ok = all(-1e-9 <= g <= 1e-3 for g in gaps)
    return ok, f"gaps={['%.1e' % g for g in gaps]}"


def c03_ratio_angle():
    gap = res = 0.0
    for lam in (0.1, 0.5, 1.0, 2.0, 3.0, 10.0):
        r = lemma3_sup_angle(lam, x_grid_size=10_000)
        gap = max(gap, abs(r.gap))
        res = max(res, r.details["identity_residual"])
    return gap <= 1e-6 and res <= 1e-12, f"max gap={gap:.1e} identity residual={res:.1e}"


def c04_jacobian():
    r = jacobian_check(samples=1000, seed=0)
    ok = r.max_fd_error <= 1e-6 and r.max_eigen_residual <= 1e-10
    return ok, f"fd error={r.max_fd_error:.1e} eigen residual={r.max_eigen_residual:.1e}"


def c05_angle_identity():
    ps = np.random.default_rng(0).uniform(1.0, 100.0, 1000)
    ps = ps[ps > 1.0]
    err = max(abs(sector_angle(p) - sector_angle_arctan(p)) for p in ps)
    return err <= 1e-12, f"max difference={err:.1e} over {ps.size} exponents"


def c06_containment():
    outside, worst, count = 0, -math.inf, 0
    for k, g in enumerate(fleet()):
        for p in P_GRID:
            phi = sector_angle(p)
            s = sample_range(g, p, 10_000, seed=k, tol=1e-9)
            outside += s.outside
            rep = max_arg_search(g, p, restarts=4, seed=k, maxfev=1000)
            v = rep.details["value"]
            outside += int(not in_sector(v, Sector(phi), 1e-9))
            worst = max(worst, s.max_abs_arg - phi, rep.best_angle - phi)
            count += 1
    return outside == 0, f"{len(fleet())} generators x {len(P_GRID)} p: outside={outside} worst excess={worst:.1e}"


def c07_matrix_sharpness():
    g = paper_generator()
    gaps = [max_arg_search(g, p, seed=0).gap for p in (1.5, 4.0)]
    ok = all(-1e-9 <= x <= 1e-3 for x in gaps)
    return ok, f"gaps={['%.1e' % x for x in gaps]}"


def c08_certificates():
    rng = np.random.default_rng(2024)
    gens = fleet()
    failed, worst_res = [], 0.0
    for i in range(200):
        g = gens[int(rng.integers(len(gens)))]
        part = Partition.random(g.space, int(rng.integers(1, g.n + 1)), rng)
        c = rng.standard_normal(part.m) + 1j * rng.standard_normal(part.m)
        p = float(rng.choice(P_GRID))
        c = c / weighted_pnorm(part.embed(c), p, g.space.weights)  # unit vector, as in the range
        t = float(np.exp(rng.uniform(math.log(0.01), math.log(10.0))))
        cert = build_certificate(g, t, part, c, p, tol=1e-9)
        worst_res = max(worst_res, cert.residual / (1 + abs(cert.direct_value)))
        if not cert.passed:
            failed.append(i)
    return not failed, f"failed instances={failed[:5]} worst relative residual={worst_res:.1e}"


def c09_reduction():
    rng = np.random.default_rng(7)
    gens = fleet()
    worst = contraction = 0.0
    for _ in range(100):
        g = gens[int(rng.integers(len(gens)))]
        part = Partition.random(g.space, int(rng.integers(1, g.n + 1)), rng)
        c = rng.standard_normal(part.m) + 1j * rng.standard_normal(part.m)
        t = float(rng.uniform(0.05, 5.0))
        lhs, rhs = reduction_sides(g, t, part, c, float(rng.choice(P_GRID)))
        worst = max(worst, abs(lhs - rhs) / (1 + abs(rhs)))
        S, _ = compress(g, t, part)
        contraction = max(contraction, S.l1_norm() - 1, S.linf_norm() - 1)
    ok = worst <= 1e-12 and contraction <= 1e-10
    return ok, f"worst relative residual={worst:.1e} worst contraction excess={contraction:.1e}"


def c10_euler():
    gens = [paper_generator()] + [random_generator(n, 500 + n) for n in (2, 3, 4, 5, 6)]
    ok, last = True, 0.0
    for g in gens:
        exact = semigroup_at(g, 1.0).matrix
        errs = [float(np.abs(euler_approx(g, 1.0, n).matrix - exact).max()) for n in (1, 10, 100, 1000)]
        ok &= all(a > b for a, b in zip(errs, errs[1:])) and errs[-1] <= 1e-2
        last = max(last, errs[-1])
    return ok, f"worst error at n=1000: {last:.1e}"


def c11_sweep():
    worst, failures = -math.inf, 0
    for g in fleet():
        for p in (1.5, 2.0, 3.0, 4.0):
            sw = contraction_sweep(g, p, restarts=4, seed=0)
            worst = max(worst, sw.max_inside)
            failures += not sw.passed
    return failures == 0, f"max inside-sector estimate={worst!r} failing sweeps={failures}"


CRITERIA = [
    (1, "two-point form inclusion", c01_inclusion, 5.0),
    (2, "two-point form sharpness", c02_scalar_sharpness, 10.0),
    (3, "diagonal ratio angle and sine identity", c03_ratio_angle, 2.0),
    (4, "duality-map Jacobian", c04_jacobian, 2.0),
    (5, "arcsin/arctan angle identity", c05_angle_identity, 0.1),
    (6, "numerical range containment on the fleet", c06_containment, 60.0),
    (7, "sharpness on the two-atom generator", c07_matrix_sharpness, 10.0),
    (8, "certificate soundness", c08_certificates, 30.0),
    (9, "compression reduction identity", c09_reduction, 10.0),
    (10, "resolvent-power exponential formula", c10_euler, 5.0),
    (11, "contraction on the analytic sector", c11_sweep, 60.0),
]


def evaluate(number, fn, budget):
    start = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - start
    in_time = elapsed < budget
    verdict = "PASS" if ok and in_time else "FAIL"
    line = f"criterion {number:2d} {verdict}  {detail}  [{elapsed:.2f} s / {budget:g} s]"
    RESULTS[number] = line
    return ok, in_time, line


@pytest.mark.parametrize("number,name,fn,budget", CRITERIA, ids=[f"c{n:02d}" for n, *_ in CRITERIA])
def test_criterion(number, name, fn, budget):
    if number in (6, 8, 9, 11):
        fleet()  # build outside the timed region; construction is shared by four criteria
    ok, in_time, line = evaluate(number, fn, budget)
    print(line)
    assert ok, line
    assert in_time, line


if __name__ == "__main__":
    fleet()
    status = 0
    for number, name, fn, budget in CRITERIA:
        ok, in_time, line = evaluate(number, fn, budget)
        print(line, flush=True)
        status |= not (ok and in_time)
    sys.exit(status)
