"""Pure-numpy reference implementations of the hot kernels.

These are the fallback path used when numba is unavailable or when
FEATURE_PROBE_NO_NUMBA=1 is set. Semantics must match kernels.numba_impl
exactly (the benchmark and the kernel tests compare both paths).
"""

from __future__ import annotations

import numpy as np

_CHUNK = 512


def cluster_distance_sums(points: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """Sum of Euclidean distances from every point to every cluster.

    Returns an (n, k) float64 array: out[i, c] = sum over j with
    labels[j] == c of ||points[i] - points[j]||. Row i includes the
    zero self-distance when c == labels[i].
    """
    pts = points.astype(np.float64, copy=False)
    n = pts.shape[0]
    out = np.zeros((n, k), dtype=np.float64)
    sq = np.einsum("ij,ij->i", pts, pts)
    onehot = np.zeros((n, k), dtype=np.float64)
    onehot[np.arange(n), labels] = 1.0
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        block = pts[start:stop]
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * (block @ pts.T)
        np.maximum(d2, 0.0, out=d2)
        np.sqrt(d2, out=d2)
        out[start:stop] = d2 @ onehot
    return out


def assign_to_centroids(points: np.ndarray, centroids: np.ndarray):
    """Nearest-centroid assignment (ties -> lowest centroid index).

    Returns (labels int64, squared distances float64).
    """
    pts = points.astype(np.float64, copy=False)
    cts = centroids.astype(np.float64, copy=False)
    d2 = (
        np.einsum("ij,ij->i", pts, pts)[:, None]
        + np.einsum("ij,ij->i", cts, cts)[None, :]
        - 2.0 * (pts @ cts.T)
    )
    np.maximum(d2, 0.0, out=d2)
    labels = np.argmin(d2, axis=1)
    return labels.astype(np.int64), d2[np.arange(len(labels)), labels]


def min_sqdist_update(points: np.ndarray, center: np.ndarray, best: np.ndarray) -> np.ndarray:
    """Elementwise min of `best` and squared distance to `center`."""
    pts = points.astype(np.float64, copy=False)
    diff = pts - center.astype(np.float64, copy=False)
    d2 = np.einsum("ij,ij->i", diff, diff)
    return np.minimum(best, d2)


def nms_suppress(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Directional non-maximum suppression of a gradient magnitude map.

    The gradient angle is quantized to 4 orientations (0, 45, 90, 135
    degrees). A pixel survives iff its magnitude is strictly greater
    than the forward neighbor and >= the backward neighbor along the
    quantized direction; out-of-bounds neighbors count as 0. The
    asymmetric tie rule keeps 2-pixel plateaus one pixel wide.
    """
    h, w = mag.shape
    m = mag.astype(np.float64, copy=False)
    angle = np.degrees(np.arctan2(gy.astype(np.float64), gx.astype(np.float64)))
    angle[angle < 0] += 180.0
    bucket = np.zeros((h, w), dtype=np.int8)  # 0deg
    bucket[(angle >= 22.5) & (angle < 67.5)] = 1  # 45deg
    bucket[(angle >= 67.5) & (angle < 112.5)] = 2  # 90deg
    bucket[(angle >= 112.5) & (angle < 157.5)] = 3  # 135deg

    # forward offsets (dy, dx) per bucket; backward is the negation
    offs = ((0, 1), (-1, 1), (-1, 0), (-1, -1))
    padded = np.zeros((h + 2, w + 2), dtype=np.float64)
    padded[1:-1, 1:-1] = m
    fwd = np.zeros((h, w), dtype=np.float64)
    bwd = np.zeros((h, w), dtype=np.float64)
    for b, (dy, dx) in enumerate(offs):
        sel = bucket == b
        fwd[sel] = padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w][sel]
        bwd[sel] = padded[1 - dy : 1 - dy + h, 1 - dx : 1 - dx + w][sel]
    keep = (m > fwd) & (m >= bwd)
    out = np.zeros_like(m)
    out[keep] = m[keep]
    return out
