"""Time the compiled kernels against the pure Python fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--size 48]

Each kernel runs on the same exact-rational input under both backends; the
script checks that the outputs agree and prints the best wall time of each.
"""
from __future__ import annotations

import argparse
import itertools
import random
import time
from fractions import Fraction

import numpy as np

from fraisse import kernels


def random_metric(rng: random.Random, n: int, den: int = 6):
    D = [[Fraction(0)] * n for _ in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        D[i][j] = D[j][i] = Fraction(rng.randint(den, 2 * den), den)
    return D


def cyclic_perms(n: int):
    return [[(x + s) % n for x in range(n)] for s in range(n)]


def cases(size: int, rng: random.Random):
    D = random_metric(rng, size)
    # equal distances everywhere keep the embedding search busy
    flat = [[Fraction(int(i != j)) for j in range(size // 3)] for i in range(size // 3)]
    small = [row[:5] for row in flat[:5]]
    compat = [[True] * len(flat)] * len(small)
    perms = cyclic_perms(size)
    probes = np.array([[[rng.randrange(size) for _ in range(12)] for _ in range(3)] for _ in range(256)])
    anchors = np.array([[[rng.randrange(size) for _ in range(12)] for _ in range(3)] for _ in range(64)])
    return {
        "triangle_violations": lambda: kernels.triangle_violations(D),
        "search_embeddings": lambda: kernels.search_embeddings(small, flat, compat, 10 ** 7, 20000),
        "delta_table": lambda: kernels.delta_table(perms, D, list(range(size))),
        "rho_min_to_anchors": lambda: kernels.rho_min_to_anchors(D, probes, anchors, 12),
    }


def best_time(fn, repeat: int):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--size", type=int, default=48)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not kernels.compiled_available():
        print("compiled kernels are not built; run `pip install -e .` with Cython available")
        return 1
    print(f"{'kernel':22s} {'cython (s)':>12s} {'python (s)':>12s} {'speedup':>9s}")
    for name, fn in cases(args.size, random.Random(args.seed)).items():
        times, outs = {}, {}
        for backend in ("cython", "python"):
            kernels.use_backend(backend)
            times[backend], outs[backend] = best_time(fn, args.repeat)
        kernels.use_backend(None)
        same = _normalize(outs["cython"]) == _normalize(outs["python"])
        print(f"{name:22s} {times['cython']:12.4f} {times['python']:12.4f} "
              f"{times['python'] / max(times['cython'], 1e-9):8.1f}x"
              + ("" if same else "  OUTPUT MISMATCH"))
    return 0


def _normalize(out):
    if isinstance(out, tuple):
        return tuple(_normalize(v) for v in out)
    if isinstance(out, np.ndarray):
        return out.tolist()
    if isinstance(out, list):
        return [_normalize(v) for v in out]
    return out


if __name__ == "__main__":
    raise SystemExit(main())
