"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import json
import time

import numpy as np

from freeflags import _kernels_py as pure

try:
    from freeflags import _kernels as compiled
except ImportError:
    compiled = None


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def cases(rng):
    M = rng.integers(0, 1009, (300, 300))
    nbr = rng.integers(0, 372000, (31, 372000)).astype(np.int32)
    f = rng.random(372000)
    E = rng.integers(0, 13, (200000, 9))
    g = rng.integers(0, 13, 9)
    return {
        "rank_mod_p 300x300": lambda k: k.rank_mod_p(M, 1009),
        "gather_sum 31x372000": lambda k: k.gather_sum(nbr, f),
        "pgl_mul_normalize 2e5 q=13": lambda k: k.pgl_mul_normalize(E, g, 13),
        "normalize_pack 2e5 q=13": lambda k: k.normalize_pack(E, 13),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    rows = []
    for name, run in cases(rng).items():
        tp = _best(lambda: run(pure), args.repeat)
        row = {"kernel": name, "python_s": round(tp, 4)}
        if compiled is not None:
            tc = _best(lambda: run(compiled), args.repeat)
            row["cython_s"] = round(tc, 4)
            row["speedup"] = round(tp / tc, 1)
        rows.append(row)
    print(json.dumps(rows, indent=1))


if __name__ == "__main__":
    main()
