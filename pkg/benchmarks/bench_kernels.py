"""Compare the compiled kernels with the pure-Python fallback.

Run ``python benchmarks/bench_kernels.py [--repeat N]``. Each kernel is timed
on the same inputs for every available backend, and the speedup is printed.
"""
import argparse
import timeit

import numpy as np

from itespec import kernels
from itespec.linalg import band_storage


def cases(rng):
    z = rng.uniform(-45, 45, 4000) + 1j * rng.uniform(-15, 15, 4000)
    k = rng.uniform(1, 40, 64) + 1j * rng.uniform(-3, 3, 64)
    coef = np.column_stack([3 * k * k, k * k])
    n, kl, ku = 800, 6, 2
    dense = np.zeros((n, n), dtype=complex)
    for d in range(-ku, kl + 1):
        idx = np.arange(max(0, -d), min(n, n - d))
        dense[idx + d, idx] = rng.standard_normal(idx.size) + 1j * rng.standard_normal(idx.size)
    dense += 10 * np.eye(n)
    ab = band_storage(dense, kl, ku)
    b = rng.standard_normal(n) + 0j
    return {
        "jhat m=5, 4000 points": lambda mod: mod.jhat(5, z),
        "jhat m=40, 4000 points": lambda mod: mod.jhat(40, z),
        "shoot m=2, 64 k, 1024 steps": lambda mod: mod.shoot(2, coef, 1e-3, 1024),
        "band_lu n=800": lambda mod: mod.band_lu(ab, kl, ku),
        "band_lu + solve n=800": lambda mod: mod.band_solve(*mod.band_lu(ab, kl, ku), kl, ku, b),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backs = kernels.backends()
    rng = np.random.default_rng(0)
    names = sorted(backs)
    print(f"{'kernel':32s}" + "".join(f"{n:>14s}" for n in names) + "   speedup")
    for label, fn in cases(rng).items():
        best = {}
        for name in names:
            mod = backs[name]
            fn(mod)  # warm-up
            best[name] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        row = f"{label:32s}" + "".join(f"{best[n] * 1e3:12.2f}ms" for n in names)
        if "compiled" in best:
            row += f"   {best['python'] / best['compiled']:7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
