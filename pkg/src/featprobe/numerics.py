"""Deterministic numerical routines under the metrics.

PCA projection, seeded k-means, silhouette scoring, and Spearman rank
correlation. Everything here is a pure function of its arguments: the
only randomness is the counter-based generator in prng, so identical
inputs and seeds reproduce identical outputs on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateInput, LengthMismatch, SingleCluster, ZeroVariance
from .prng import Stream

KMEANS_MAX_ITERS = 100
KMEANS_TOL = 1e-6


@dataclass(frozen=True)
class PointMatrix:
    """n points in d dimensions, row-major float32."""

    data: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.data, dtype=np.float32)
        if a.ndim != 2:
            raise ValueError(f"point matrix must be 2-D, got shape {a.shape}")
        if not np.isfinite(a).all():
            raise ValueError("point matrix must be finite")
        object.__setattr__(self, "data", a)

    @classmethod
    def from_array(cls, a: np.ndarray) -> PointMatrix:
        return cls(np.asarray(a, dtype=np.float32))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class ClusterAssignment:
    """Cluster labels in [0, k) for each point."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        lab = np.ascontiguousarray(self.labels, dtype=np.int64)
        if lab.ndim != 1:
            raise ValueError("labels must be 1-D")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if lab.size and (lab.min() < 0 or lab.max() >= self.k):
            raise ValueError("labels out of range")
        object.__setattr__(self, "labels", lab)

    def counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


def pca_project(points: PointMatrix, n_components: int, seed: int = 0) -> tuple[PointMatrix, np.ndarray]:
    """Project points onto their leading principal components.

    Returns (scores, explained_variance) where scores has
    min(n_components, d, n - 1) columns. Components are taken from an
    SVD of the centered data; each component's sign is fixed so its
    largest-magnitude entry is positive, which keeps projections
    reproducible across linear algebra backends. Explained variances
    are the sample variances (n - 1 denominator) along each component.
    The seed is accepted for interface symmetry; the decomposition
    itself is deterministic.
    """
    del seed
    if n_components < 1:
        raise DegenerateInput(f"n_components must be >= 1, got {n_components}")
    n, d = points.n, points.d
    if n < 2:
        raise DegenerateInput(f"PCA needs at least 2 points, got {n}")
    keep = min(n_components, d, n - 1)
    x = points.data.astype(np.float64)
    centered = x - x.mean(axis=0)
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    for i in range(keep):
        j = int(np.argmax(np.abs(vt[i])))
        if vt[i, j] < 0:
            vt[i] = -vt[i]
            u[:, i] = -u[:, i]
    scores = u[:, :keep] * s[:keep]
    explained = (s[:keep] ** 2) / (n - 1)
    return PointMatrix(scores.astype(np.float32)), explained


def _kmeans_pp_init(x: np.ndarray, k: int, stream: Stream) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]), dtype=np.float64)
    first = int(stream.integers(1, n)[0])
    centers[0] = x[first]
    d2 = np.full(n, np.inf)
    for c in range(1, k):
        d2 = kernels.min_sqdist_update(x, centers[c - 1], d2)
        total = float(d2.sum())
        if total <= 0.0:
            idx = int(stream.integers(1, n)[0])
        else:
            r = float(stream.uniforms(1)[0]) * total
            idx = int(np.searchsorted(np.cumsum(d2), r, side="right"))
            idx = min(idx, n - 1)
        centers[c] = x[idx]
    return centers


def kmeans(points: PointMatrix, k: int, seed: int = 0) -> ClusterAssignment:
    """Seeded k-means++ initialization followed by Lloyd iterations.

    Runs at most KMEANS_MAX_ITERS sweeps, stopping when no centroid
    moves by more than KMEANS_TOL. An empty cluster is repaired by
    reassigning the point currently farthest from its centroid. With
    n <= k each point becomes its own cluster and the remaining ids
    stay empty.
    """
    if k < 1:
        raise DegenerateInput(f"k must be >= 1, got {k}")
    n = points.n
    if n < 1:
        raise DegenerateInput("kmeans needs at least one point")
    if n <= k:
        return ClusterAssignment(np.arange(n, dtype=np.int64), k)

    x = points.data.astype(np.float64)
    centers = _kmeans_pp_init(x, k, Stream(seed))
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(KMEANS_MAX_ITERS):
        labels, dists = kernels.assign_to_centroids(x, centers)
        counts = np.bincount(labels, minlength=k)
        for empty in np.flatnonzero(counts == 0):
            far = int(np.argmax(dists))
            labels[far] = empty
            dists[far] = 0.0
            counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, x)
        new_centers = sums / counts[:, None]
        movement = float(np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max())
        centers = new_centers
        if movement < KMEANS_TOL:
            break
    return ClusterAssignment(labels, k)


def silhouette(points: PointMatrix, assign: ClusterAssignment) -> float:
    """Mean silhouette over all points.

    For point i with own-cluster mean distance a and best other-cluster
    mean distance b, the score is (b - a) / max(a, b); a singleton
    cluster contributes 0, as does the 0/0 case of coincident points.
    """
    n = points.n
    if n < 2:
        raise DegenerateInput(f"silhouette needs at least 2 points, got {n}")
    if assign.labels.shape[0] != n:
        raise LengthMismatch(f"{n} points but {assign.labels.shape[0]} labels")
    counts = assign.counts()
    if int((counts > 0).sum()) < 2:
        raise SingleCluster("silhouette needs at least 2 non-empty clusters")

    sums = kernels.cluster_distance_sums(points.data.astype(np.float64), assign.labels, assign.k)
    labels = assign.labels
    own_counts = counts[labels]
    own_sums = sums[np.arange(n), labels]

    other = sums / np.where(counts > 0, counts, 1)[None, :]
    other[:, :] = np.where(counts[None, :] > 0, other, np.inf)
    other[np.arange(n), labels] = np.inf
    b = other.min(axis=1)

    scores = np.zeros(n, dtype=np.float64)
    regular = own_counts > 1
    a = np.zeros(n, dtype=np.float64)
    a[regular] = own_sums[regular] / (own_counts[regular] - 1)
    denom = np.maximum(a, b)
    ok = regular & (denom > 0)
    scores[ok] = (b[ok] - a[ok]) / denom[ok]
    return float(scores.mean())


def _average_ranks(v: np.ndarray) -> np.ndarray:
    uniq, inverse, counts = np.unique(v, return_inverse=True, return_counts=True)
    del uniq
    ends = np.cumsum(counts)
    starts = ends - counts + 1
    avg = (starts + ends) / 2.0
    return avg[inverse]


def spearman(x: np.ndarray, y: np.ndarray) -> float:
    """Spearman rank correlation with average ranks for ties."""
    xv = np.asarray(x, dtype=np.float64).ravel()
    yv = np.asarray(y, dtype=np.float64).ravel()
    if xv.shape[0] != yv.shape[0]:
        raise LengthMismatch(f"length mismatch: {xv.shape[0]} vs {yv.shape[0]}")
    if xv.shape[0] < 2:
        raise DegenerateInput(f"correlation needs at least 2 pairs, got {xv.shape[0]}")
    if not (np.isfinite(xv).all() and np.isfinite(yv).all()):
        raise DegenerateInput("correlation inputs must be finite")
    rx = _average_ranks(xv)
    ry = _average_ranks(yv)
    if np.ptp(rx) == 0 or np.ptp(ry) == 0:
        raise ZeroVariance("constant input has no rank ordering")
    rxc = rx - rx.mean()
    ryc = ry - ry.mean()
    return float((rxc * ryc).sum() / np.sqrt((rxc**2).sum() * (ryc**2).sum()))
