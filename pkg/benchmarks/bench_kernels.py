"""Time the jitted kernels against the pure-numpy fallback.

Runs every hot kernel on workloads sized like real profiling jobs
(stride-4 maps of a 640 px image, k-means at the silhouette sample cap),
checks that both backends agree, and prints per-call timings. Numba is
imported directly so the comparison works regardless of the
FEATURE_PROBE_NO_NUMBA setting in the caller's environment.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from featprobe import prng
from featprobe.kernels import numpy_impl

try:
    from featprobe.kernels import numba_impl
except ImportError:
    numba_impl = None


def make_workloads() -> dict:
    n, d, k = 4096, 32, 10
    points = prng.normals(1, n * d).reshape(n, d).astype(np.float32)
    labels = (prng.uniforms(2, n) * k).astype(np.int64)
    centroids = prng.normals(3, k * d).reshape(k, d).astype(np.float64)
    center = centroids[0]
    best = np.full(n, np.inf)

    side = 160  # stride-4 map of a 640 px image
    mag = prng.uniforms(4, side * side).reshape(side, side)
    gx = prng.normals(5, side * side).reshape(side, side)
    gy = prng.normals(6, side * side).reshape(side, side)

    return {
        "cluster_distance_sums": (points, labels, k),
        "assign_to_centroids": (points, centroids),
        "min_sqdist_update": (points, center, best),
        "nms_suppress": (mag, gx, gy),
    }


def time_call(fn, args, repeats: int) -> float:
    fn(*args)  # warmup; compiles the jitted path on first use
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def max_diff(a, b) -> float:
    if isinstance(a, tuple):
        return max(max_diff(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    workloads = make_workloads()
    header = f"{'kernel':<24}{'numpy':>12}{'numba':>12}{'speedup':>10}{'max diff':>12}"
    print(header)
    print("-" * len(header))
    for name, call_args in workloads.items():
        np_fn = getattr(numpy_impl, name)
        np_time = time_call(np_fn, call_args, args.repeats)
        if numba_impl is None:
            print(f"{name:<24}{np_time * 1e3:>10.3f}ms{'n/a':>12}{'n/a':>10}{'n/a':>12}")
            continue
        nb_fn = getattr(numba_impl, name)
        nb_time = time_call(nb_fn, call_args, args.repeats)
        diff = max_diff(np_fn(*call_args), nb_fn(*call_args))
        print(
            f"{name:<24}{np_time * 1e3:>10.3f}ms{nb_time * 1e3:>10.3f}ms"
            f"{np_time / nb_time:>9.1f}x{diff:>12.2e}"
        )
    if numba_impl is None:
        print("\nnumba not importable; only the fallback was timed")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
