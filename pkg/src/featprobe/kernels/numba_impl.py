"""Numba-jitted hot kernels. Same contracts as kernels.numpy_impl."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def cluster_distance_sums(points, labels, k):
    n, d = points.shape
    out = np.zeros((n, k), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for c in range(d):
                diff = points[i, c] - points[j, c]
                acc += diff * diff
            dist = np.sqrt(acc)
            out[i, labels[j]] += dist
            out[j, labels[i]] += dist
    return out


@njit(cache=True)
def assign_to_centroids(points, centroids):
    n, d = points.shape
    k = centroids.shape[0]
    labels = np.zeros(n, dtype=np.int64)
    dists = np.zeros(n, dtype=np.float64)
    for i in range(n):
        best = np.inf
        arg = 0
        for c in range(k):
            acc = 0.0
            for j in range(d):
                diff = points[i, j] - centroids[c, j]
                acc += diff * diff
            if acc < best:
                best = acc
                arg = c
        labels[i] = arg
        dists[i] = best
    return labels, dists


@njit(cache=True)
def min_sqdist_update(points, center, best):
    n, d = points.shape
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        acc = 0.0
        for j in range(d):
            diff = points[i, j] - center[j]
            acc += diff * diff
        out[i] = acc if acc < best[i] else best[i]
    return out


@njit(cache=True)
def _nms_core(mag, bucket):
    h, w = mag.shape
    out = np.zeros((h, w), dtype=np.float64)
    # forward (dy, dx) per bucket: 0->(0,1) 1->(-1,1) 2->(-1,0) 3->(-1,-1)
    for y in range(h):
        for x in range(w):
            m = mag[y, x]
            b = bucket[y, x]
            if b == 0:
                dy, dx = 0, 1
            elif b == 1:
                dy, dx = -1, 1
            elif b == 2:
                dy, dx = -1, 0
            else:
                dy, dx = -1, -1
            fy, fx = y + dy, x + dx
            by, bx = y - dy, x - dx
            fwd = mag[fy, fx] if 0 <= fy < h and 0 <= fx < w else 0.0
            bwd = mag[by, bx] if 0 <= by < h and 0 <= bx < w else 0.0
            if m > fwd and m >= bwd:
                out[y, x] = m
    return out


def nms_suppress(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    # Bucketing is cheap and branchy; keep it in numpy and jit the scan.
    angle = np.degrees(np.arctan2(gy.astype(np.float64), gx.astype(np.float64)))
    angle[angle < 0] += 180.0
    bucket = np.zeros(mag.shape, dtype=np.int8)
    bucket[(angle >= 22.5) & (angle < 67.5)] = 1
    bucket[(angle >= 67.5) & (angle < 112.5)] = 2
    bucket[(angle >= 112.5) & (angle < 157.5)] = 3
    return _nms_core(mag.astype(np.float64, copy=False), bucket)
