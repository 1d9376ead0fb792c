"""nrsector: command-line verification suites with JSON/CSV reports.

Examples::

    nrsector lemma2 --p 4 --samples 100000 --seed 42
    nrsector lemma3 --lambda 3
    nrsector range --gen paper2x2 --p 2 --samples 1000 -o range.csv --format csv
    nrsector sweep --gen random:6 --p 3 --seed 7

Exit status is 0 when every check passes, 1 when a check fails and 2 for
usage errors (bad flags, unreadable or invalid generator input).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__
from ._backend import BACKEND
from .analytic_sector import INSIDE_TOL, contraction_sweep
from .certificate import Partition, block_pairings, build_certificate, compress, reduction_sides
from .core import FiniteMeasureSpace, sector_angle, weighted_pnorm
from .errors import NRSectorError
from .numerical_range import max_arg_search, sample_range
from .operators import (
    Generator,
    make_graph_laplacian,
    make_lambda_family,
    paper_generator,
    random_generator,
    semigroup_at,
    validate_generator,
)
from .scalar_lemmas import (
    jacobian_check,
    lemma2_inclusion,
    lemma3_sup_angle,
    scalar_sharpness_search,
)

SCHEMA_VERSION = 1
COMMANDS = ("lemma2", "lemma3", "jacobian", "range", "sharpness", "certificate", "compress",
            "sweep", "validate")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- generators

def _complex_matrix(raw) -> np.ndarray:
    def entry(x):
        if isinstance(x, (list, tuple)):
            if len(x) != 2:
                raise UsageError("complex entries must be [re, im] pairs")
            return complex(float(x[0]), float(x[1]))
        return complex(float(x))

    try:
        return np.array([[entry(x) for x in row] for row in raw], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"cannot read matrix: {exc}") from exc


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def parse_generator_spec(spec: str, seed: int):
    """Resolve a --gen value to (matrix, space, label) without validating it."""
    if spec == "paper2x2":
        g = paper_generator()
        return g.matrix, g.space, g.label
    if spec.startswith("lambda:"):
        try:
            re_, im_ = (float(v) for v in spec[len("lambda:"):].split(","))
        except ValueError as exc:
            raise UsageError(f"expected lambda:<re>,<im>, got {spec!r}") from exc
        g = make_lambda_family(complex(re_, im_))
        return g.matrix, g.space, g.label
    if spec.startswith(("random:", "random-pp:")):
        kind, _, n = spec.partition(":")
        try:
            n = int(n)
        except ValueError as exc:
            raise UsageError(f"expected {kind}:<n>, got {spec!r}") from exc
        g = random_generator(n, seed, positivity_preserving=(kind == "random-pp"))
        return g.matrix, g.space, g.label
    if spec.startswith("laplacian:"):
        data = _load_json(spec[len("laplacian:"):])
        try:
            space = FiniteMeasureSpace(data.get("weights", [1.0] * len(data["d"])))
            g = make_graph_laplacian(data["W"], data["d"], space, label=spec)
        except KeyError as exc:
            raise UsageError(f"laplacian file needs 'W' and 'd': missing {exc}") from exc
        return g.matrix, g.space, g.label
    if os.path.exists(spec):
        data = _load_json(spec)
        if "matrix" not in data:
            raise UsageError(f"{spec}: generator file needs a 'matrix' field")
        A = _complex_matrix(data["matrix"])
        space = FiniteMeasureSpace(data.get("weights", [1.0] * len(A)))
        return A, space, os.path.basename(spec)
    raise UsageError(f"unknown generator {spec!r}")


def load_generator(spec: str, seed: int) -> Generator:
    A, space, label = parse_generator_spec(spec, seed)
    return Generator(A, space, label=label)


# ---------------------------------------------------------------- reports

def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [_clean(float(x.real)), _clean(float(x.imag))]
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def check(name, passed, defect, tolerance) -> dict:
    return {"name": name, "passed": bool(passed), "defect": defect, "tolerance": tolerance}


def matrix_json(M):
    M = np.asarray(M)
    return np.stack([M.real, M.imag], axis=-1).tolist()


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".nrsector-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def checks_csv(checks) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "passed", "defect", "tolerance"])
    for c in checks:
        w.writerow([c["name"], int(c["passed"]), repr(c["defect"]), repr(c["tolerance"])])
    return buf.getvalue()


# ---------------------------------------------------------------- commands

def _p(args, default):
    return default if args.p is None else args.p


def cmd_lemma2(args):
    p = _p(args, 4.0)
    res = lemma2_inclusion(p, samples=args.samples or 100_000, seed=args.seed)
    checks = [
        check("inclusion", res.violations == 0, res.violations, 0),
        check("max_angle", res.max_angle <= res.target + 1e-9, res.max_angle - res.target, 1e-9),
        check("collinear_nonnegative", res.collinear_min_real >= -1e-12, -res.collinear_min_real, 1e-12),
    ]
    return checks, res.as_dict(), None


def cmd_lemma3(args):
    lam = 3.0 if args.lam is None else args.lam
    rep = lemma3_sup_angle(lam, x_grid_size=args.samples or 10_000)
    checks = [
        check("sup_angle", abs(rep.gap) <= 1e-6, abs(rep.gap), 1e-6),
        check("sine_identity", rep.details["identity_residual"] <= 1e-12,
              rep.details["identity_residual"], 1e-12),
    ]
    return checks, rep.as_dict() | {"lambda": lam}, None


def cmd_jacobian(args):
    res = jacobian_check(args.samples or 1000, seed=args.seed, p=args.p)
    checks = [
        check("finite_difference", res.max_fd_error <= 1e-6, res.max_fd_error, 1e-6),
        check("eigenpairs", res.max_eigen_residual <= 1e-10, res.max_eigen_residual, 1e-10),
    ]
    return checks, res.as_dict() | {"p": args.p}, None


def cmd_range(args):
    gen = load_generator(args.gen, args.seed)
    p = _p(args, 4.0)
    s = sample_range(gen, p, args.samples or 10_000, seed=args.seed)
    target = sector_angle(p)
    checks = [
        check("in_sector", s.outside == 0, s.outside, 0),
        check("max_abs_arg", s.max_abs_arg <= target + 1e-9, s.max_abs_arg - target, 1e-9),
    ]
    if p == 2:
        imag = float(np.abs(s.values.imag).max())
        checks.append(check("real_values", imag <= 1e-10, imag, 1e-10))
    return checks, s.as_dict(), s.to_csv()


def cmd_sharpness(args):
    p = _p(args, 4.0)
    restarts = args.restarts or (64 if args.gen is None else 16)
    if args.gen is None:
        rep = scalar_sharpness_search(p, restarts=restarts, seed=args.seed)
        sharp_known = True
    else:
        gen = load_generator(args.gen, args.seed)
        rep = max_arg_search(gen, p, restarts=restarts, seed=args.seed)
        sharp_known = args.gen == "paper2x2" or args.gen.startswith("lambda:")
    checks = [check("upper_bound", rep.best_angle <= rep.target + 1e-9, -rep.gap, 1e-9)]
    if sharp_known:
        checks.append(check("sharpness", rep.gap <= 1e-3, rep.gap, 1e-3))
    return checks, rep.as_dict(), None


def _partition_and_coeffs(gen, args, rng):
    m = args.blocks if args.blocks else min(3, gen.n)
    part = Partition.random(gen.space, m, rng)
    c = rng.standard_normal(part.m) + 1j * rng.standard_normal(part.m)
    return part, c


def cmd_certificate(args):
    gen = load_generator(args.gen, args.seed)
    rng = np.random.default_rng(args.seed)
    part, c = _partition_and_coeffs(gen, args, rng)
    p = _p(args, 4.0)
    c = c / weighted_pnorm(part.embed(c), p, gen.space.weights)
    cert = build_certificate(gen, args.t, part, c, p)
    checks = [check(k, v["passed"], v["defect"], None) for k, v in cert.checks.items()]
    return checks, cert.as_dict() | {"blocks": [list(b) for b in part.blocks]}, None


def cmd_compress(args):
    gen = load_generator(args.gen, args.seed)
    rng = np.random.default_rng(args.seed)
    part, c = _partition_and_coeffs(gen, args, rng)
    p = _p(args, 4.0)
    S, quotient = compress(gen, args.t, part)
    lhs, rhs = reduction_sides(gen, args.t, part, c, p)
    rel = abs(lhs - rhs) / (1 + abs(rhs))
    a = block_pairings(semigroup_at(gen, args.t).matrix, part)
    formula = float(np.abs(S.matrix - a / part.measures[:, None]).max())
    checks = [
        check("reduction_identity", rel <= 1e-12, rel, 1e-12),
        check("l1_contraction", S.l1_norm() <= 1 + 1e-10, S.l1_norm() - 1, 1e-10),
        check("linf_contraction", S.linf_norm() <= 1 + 1e-10, S.linf_norm() - 1, 1e-10),
        check("block_formula", formula <= 1e-12, formula, 1e-12),
    ]
    result = {
        "blocks": [list(b) for b in part.blocks],
        "quotient_weights": quotient.weights.tolist(),
        "S": matrix_json(S.matrix),
        "c": matrix_json(c),
        "lhs": lhs,
        "rhs": rhs,
    }
    return checks, result, None


def cmd_sweep(args):
    gen = load_generator(args.gen, args.seed)
    sw = contraction_sweep(gen, _p(args, 4.0), restarts=args.restarts or 4, seed=args.seed)
    checks = [check("inside_sector_contraction", sw.passed, sw.max_inside - 1, INSIDE_TOL)]
    return checks, sw.as_dict(), sw.to_csv()


def cmd_validate(args):
    A, space, label = parse_generator_spec(args.gen, args.seed)
    rep = validate_generator(A, space)
    checks = [
        check("self_adjoint", rep.self_adjoint, rep.self_adjoint_defect, 1e-12),
        check("positive_semidefinite", rep.positive_semidefinite, -rep.min_eigenvalue, 1e-10),
        check("linf_contractive", rep.linf_contractive, rep.linf_defect, 1e-9),
        check("l1_contractive", rep.l1_contractive, rep.l1_defect, 1e-9),
    ]
    return checks, rep.as_dict() | {"generator_id": label, "matrix": matrix_json(A),
                                    "weights": space.weights.tolist()}, None


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}
HELP = {
    "lemma2": "sample two-point forms and check sector inclusion",
    "lemma3": "sup angle of h conj(A h) for A = diag(1, lambda) and the sine identity",
    "jacobian": "compare the Jacobian of F_p with finite differences",
    "range": "sample the numerical-range form of a generator",
    "sharpness": "maximise the angle (scalar form, or a generator with --gen)",
    "certificate": "build and check the step-function sector certificate",
    "compress": "compress T(t) onto a block partition and check the reduction identity",
    "sweep": "estimate p-norms of exp(-zA) along rays",
    "validate": "validate a generator matrix",
}


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nrsector",
        description="Verify sector bounds for the L^p numerical range of symmetric "
                    "L-infinity-contractive semigroup generators.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def positive_float(s):
        v = float(s)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s}")
        return v

    def exponent(s):
        v = float(s)
        if not 1 < v < math.inf:
            raise argparse.ArgumentTypeError(f"p must lie in (1, inf), got {s}")
        return v

    def positive_int(s):
        v = int(s)
        if v < 1:
            raise argparse.ArgumentTypeError(f"must be >= 1, got {s}")
        return v

    for name in COMMANDS:
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--p", type=exponent, default=None, help="exponent in (1, inf)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=positive_int, default=None)
        sp.add_argument("--restarts", type=positive_int, default=None)
        sp.add_argument("--t", type=positive_float, default=1.0, help="time for certificate/compress")
        sp.add_argument("--n", type=positive_int, default=None, help="size for --gen random")
        sp.add_argument("--gen", default="paper2x2" if name != "sharpness" else None,
                        help="paper2x2 | lambda:<re>,<im> | laplacian:<file> | random:<n> | "
                             "random-pp:<n> | <matrix.json>")
        sp.add_argument("--lambda", dest="lam", type=positive_float, default=None,
                        help="eigenvalue ratio for lemma3")
        sp.add_argument("--blocks", type=positive_int, default=None, help="partition block count")
        sp.add_argument("-o", "--output", default=None, help="report path (stdout if omitted)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--timing", action="store_true",
                        help="record wall time in the report (breaks byte-for-byte reproducibility)")
    return parser


def run(args) -> int:
    if args.gen is not None and args.n is not None and args.gen in {"random", "random-pp"}:
        args.gen = f"{args.gen}:{args.n}"
    start = time.perf_counter()
    checks, result, csv_text = HANDLERS[args.command](args)
    elapsed = time.perf_counter() - start
    passed = all(c["passed"] for c in checks)
    config = {k: v for k, v in sorted(vars(args).items()) if k not in {"output", "timing"}}
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": "nrsector",
        "version": __version__,
        "backend": BACKEND,
        "command": args.command,
        "config": config,
        "seed": args.seed,
        "passed": passed,
        "checks": checks,
        "result": result,
    }
    if args.timing:
        report["wall_time_s"] = elapsed
    if args.format == "json":
        text = json.dumps(_clean(report), indent=2) + "\n"
    else:
        text = csv_text if csv_text is not None else checks_csv(_clean(checks))
    if args.output:
        write_atomic(args.output, text)
    else:
        sys.stdout.write(text)
    print(f"nrsector {args.command}: {'PASS' if passed else 'FAIL'} ({elapsed:.2f} s)", file=sys.stderr)
    for c in checks:
        if not c["passed"]:
            print(f"  failed: {c['name']} defect={c['defect']}", file=sys.stderr)
    return 0 if passed else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except (UsageError, NRSectorError) as exc:
        parser.print_usage(sys.stderr)
        print(f"nrsector: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
