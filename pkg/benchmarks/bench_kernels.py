"""Time the numpy and numba implementations of each box-scan kernel.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from toricflex import _kernels


def cases():
    quad = np.array([[1, 0, 0], [0, 1, 0], [1, 0, 1], [0, 1, 1]], dtype=np.int64)
    x21 = np.array([[1, 0], [1, 2]], dtype=np.int64)
    cands = np.array([[a, b] for a in range(-6, 7) for b in range(-6, 7)], dtype=np.int64)
    mask = np.array([True, False, False, False])
    return {
        "roots (quadric3, bound 6)": ("roots", (quad, np.int64(6))),
        "parallelepiped (2x2, box 40)": (
            "parallelepiped",
            (np.array([[2, -1], [0, 1]], dtype=np.int64), np.int64(2), np.full(2, -40, np.int64), np.full(2, 40, np.int64)),
        ),
        "reducible (169 candidates)": ("reducible", (cands, x21)),
        "unstable (quadric3, bound 6)": (
            "unstable",
            (quad, np.int64(0), np.array([-1, 0, 1], dtype=np.int64), mask, np.int64(6)),
        ),
    }


def best_of(fn, args, repeat):
    fn(*args)  # warm up (numba compiles here)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; only the numpy path is available")
    print(f"{'kernel':32} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for label, (key, inputs) in cases().items():
        t_np = best_of(_kernels.NUMPY[key], inputs, args.repeat)
        if _kernels.HAVE_NUMBA:
            t_nb = best_of(_kernels.NUMBA[key], inputs, args.repeat)
            print(f"{label:32} {t_np * 1e3:10.3f} {t_nb * 1e3:10.3f} {t_np / t_nb:8.1f}")
        else:
            print(f"{label:32} {t_np * 1e3:10.3f} {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
