"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 20]
"""

import argparse
import timeit

import numpy as np

from nrsector import _fallback

try:
    from nrsector import _kernels
except ImportError:
    _kernels = None


def cases(rng):
    n = 8
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    mu = rng.uniform(0.5, 2.0, n)
    X = rng.standard_normal((10_000, n)) + 1j * rng.standard_normal((10_000, n))
    z = rng.standard_normal(100_000) + 1j * rng.standard_normal(100_000)
    w = rng.standard_normal(100_000) + 1j * rng.standard_normal(100_000)
    starts = rng.standard_normal((12, n)) + 1j * rng.standard_normal((12, n))
    return {
        "lp_form_many (1e5 pairs)": lambda k: k.lp_form_many(z, w, 3.0),
        "form_values (1e4 x 8)": lambda k: k.form_values(A, mu, X, 3.0),
        "pnorm_ascent (12 starts, n=8)": lambda k: k.pnorm_ascent(A, mu, 3.0, starts),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'python ms':>10s} {'compiled ms':>12s} {'speedup':>8s}")
    for name, fn in cases(rng).items():
        py = min(timeit.repeat(lambda: fn(_fallback), number=1, repeat=args.repeat)) * 1e3
        if _kernels is None:
            print(f"{name:32s} {py:10.3f} {'n/a':>12s}")
            continue
        cy = min(timeit.repeat(lambda: fn(_kernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:32s} {py:10.3f} {cy:12.3f} {py / cy:7.1f}x")


if __name__ == "__main__":
    main()
