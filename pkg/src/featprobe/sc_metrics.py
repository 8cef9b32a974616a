"""Structural coherence of a feature stage.

Two views of the same question, does the stage organize into coherent
regions: a spatial view (patch-grid variance ratio) and a feature-space
view (cluster separation of pixel vectors). Their geometric mean is the
stage's structural coherence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridTooFine, SingleCluster
from .numerics import PointMatrix, kmeans, pca_project, silhouette
from .prng import Stream, derive
from .tensor_store import FeatureTensor


@dataclass(frozen=True)
class SCParams:
    """Knobs for the structural-coherence metrics."""

    grid_k: int = 16
    pca_dims: int = 32
    k_set: tuple[int, ...] = (6, 8, 10)
    sample_cap: int = 4096
    seed: int = 0

    def __post_init__(self):
        if self.grid_k < 2:
            raise ValueError(f"grid_k must be >= 2, got {self.grid_k}")
        if self.pca_dims < 1:
            raise ValueError(f"pca_dims must be >= 1, got {self.pca_dims}")
        ks = tuple(int(k) for k in self.k_set)
        if not ks or any(k < 2 for k in ks):
            raise ValueError(f"k_set must be non-empty with every k >= 2, got {self.k_set}")
        if self.sample_cap <= max(ks):
            raise ValueError(
                f"sample_cap {self.sample_cap} must exceed the largest k {max(ks)}"
            )
        object.__setattr__(self, "k_set", ks)

    def to_dict(self) -> dict:
        return {
            "grid_k": self.grid_k,
            "pca_dims": self.pca_dims,
            "k_set": list(self.k_set),
            "sample_cap": self.sample_cap,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class SCResult:
    sfc: float
    scs: float
    sc: float
    flags: tuple[str, ...] = ()


def _patch_edges(n: int, g: int) -> np.ndarray:
    # As-equal-as-possible split; the first n % g patches get the extra pixel.
    base, rem = divmod(n, g)
    sizes = np.full(g, base, dtype=np.int64)
    sizes[:rem] += 1
    return np.concatenate(([0], np.cumsum(sizes)))


def _sfc(tensor: FeatureTensor, params: SCParams) -> tuple[float, tuple[str, ...]]:
    g = params.grid_k
    h, w = tensor.height, tensor.width
    if h < g or w < g:
        raise GridTooFine(f"grid {g}x{g} does not fit a {h}x{w} stage")
    mean_map = tensor.data.astype(np.float64).mean(axis=0)
    ye = _patch_edges(h, g)
    xe = _patch_edges(w, g)
    mus = np.empty((g, g), dtype=np.float64)
    sigmas = np.empty((g, g), dtype=np.float64)
    for i in range(g):
        for j in range(g):
            patch = mean_map[ye[i] : ye[i + 1], xe[j] : xe[j + 1]]
            mus[i, j] = patch.mean()
            sigmas[i, j] = patch.var()
    inter = float(mus.var())
    intra = float(sigmas.mean())
    if inter + intra == 0.0:
        return 0.0, ("sfc_constant",)
    return inter / (inter + intra), ()


def sfc(tensor: FeatureTensor, params: SCParams | None = None) -> float:
    """Spatial focus: variance of patch means over total patch variance.

    The channel-mean map is cut into a grid_k x grid_k grid of
    as-equal-as-possible patches. High values mean the map varies
    between patches but is flat within them. Population variances
    throughout; a constant map scores 0.
    """
    value, _ = _sfc(tensor, params or SCParams())
    return value


def _scs(tensor: FeatureTensor, params: SCParams) -> tuple[float, tuple[str, ...]]:
    c, h, w = tensor.data.shape
    pixels = tensor.data.reshape(c, h * w).T
    if np.all(pixels == pixels[0]):
        return 0.5, ("scs_constant",)

    scores, _ = pca_project(PointMatrix(pixels), params.pca_dims, params.seed)
    data = scores.data
    if data.shape[0] > params.sample_cap:
        picks = Stream(derive(params.seed, "scs-subsample")).choice(
            data.shape[0], params.sample_cap
        )
        data = data[picks]

    flags: list[str] = []
    sils = []
    sample = PointMatrix(data)
    for k in params.k_set:
        if sample.n <= k:
            sils.append(0.0)
            flags.append(f"scs_degenerate_k{k}")
            continue
        assign = kmeans(sample, k, derive(params.seed, "scs-kmeans", k))
        try:
            sils.append(silhouette(sample, assign))
        except SingleCluster:
            sils.append(0.0)
            flags.append(f"scs_degenerate_k{k}")
    return (float(np.median(sils)) + 1.0) / 2.0, tuple(flags)


def scs(tensor: FeatureTensor, params: SCParams | None = None) -> float:
    """Cluster separation of pixel feature vectors, mapped to [0, 1].

    Pixels are projected to at most pca_dims principal components,
    subsampled to sample_cap points when larger, then clustered for
    each k in k_set. The median silhouette over k_set is rescaled from
    [-1, 1] to [0, 1]. Degenerate runs (too few points, or a single
    non-empty cluster) contribute a silhouette of 0; a constant tensor
    scores 0.5.
    """
    value, _ = _scs(tensor, params or SCParams())
    return value


def sc(tensor: FeatureTensor, params: SCParams | None = None) -> SCResult:
    """Structural coherence: geometric mean of sfc and scs."""
    p = params or SCParams()
    sfc_value, sfc_flags = _sfc(tensor, p)
    scs_value, scs_flags = _scs(tensor, p)
    return SCResult(
        sfc=sfc_value,
        scs=scs_value,
        sc=float(np.sqrt(sfc_value * scs_value)),
        flags=sfc_flags + scs_flags,
    )
