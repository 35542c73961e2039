"""Compare the compiled and numpy kernel backends on random scan inputs.

    python3 benchmarks/bench_kernels.py [--sizes 100 200 400] [--threads 1 4] [--repeat 3]

Each run also checks that both backends return identical results.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from bestprox import kernels


def _inputs(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    lhs = rng.uniform(0, 1, (n, n))
    bb = rng.uniform(0.5, 2.0, (n, n))
    ab = rng.uniform(0, 1, n)
    pts = rng.uniform(-1, 1, (n, 1))
    tri = np.abs(pts - pts.T)
    return lhs, bb, ab, tri


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 400])
    parser.add_argument("--threads", type=int, nargs="+", default=[1, 4])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; only the numpy fallback is timed")
    print(f"{'kernel':<10} {'n':>5} {'threads':>7} " + " ".join(f"{b:>10}" for b in backends) + "   speedup")
    for n in args.sizes:
        lhs, bb, ab, tri = _inputs(n)
        jobs = {
            "quad": lambda b, t: kernels.quad_scan(lhs, bb, ab, None, kernels.P_PROXIMAL, 1e-9, t, b),
            "pair": lambda b, t: kernels.pair_scan(lhs, lhs, 1e-9, t, b),
            "triangle": lambda b, t: kernels.triangle_first_violation(tri, 1e-9, t, b),
        }
        for name, job in jobs.items():
            for t in args.threads:
                results = {b: job(b, t) for b in backends}
                if len({repr(r) for r in results.values()}) != 1:
                    raise SystemExit(f"backend mismatch on {name} n={n}: {results}")
                times = {b: _time(lambda: job(b, t), args.repeat) for b in backends}
                speed = times["python"] / times["cython"] if "cython" in times else 1.0
                cols = " ".join(f"{times[b] * 1e3:>8.2f}ms" for b in backends)
                print(f"{name:<10} {n:>5} {t:>7} {cols}   {speed:6.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
