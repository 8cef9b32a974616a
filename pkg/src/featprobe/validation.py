"""Checks that the label-free scores track labeled ground truth.

Given a segment label map, sc_gt measures how tightly feature vectors
cluster within segments versus between them, which is what the
label-free structural coherence tries to estimate. correlate_profiles
then asks whether a metric ranks outcomes the same way an external
measurement does.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoValidSegments
from .image_ops import resize_nearest
from .numerics import _average_ranks, spearman
from .tensor_store import FeatureTensor, LabelMap

MIN_SEGMENT_PIXELS = 4


def sc_gt(tensor: FeatureTensor, labels: LabelMap) -> float:
    """Labeled structural coherence of a stage.

    Labels are nearest-neighbor downsampled to the stage grid. Segments
    with id 0 are ignored and segments smaller than MIN_SEGMENT_PIXELS
    are dropped; at least two segments must survive. The score is the
    pixel-count-weighted between-segment variance over total variance,
    averaged across channels (population variances). Identical feature
    vectors everywhere give 0.
    """
    c, h, w = tensor.data.shape
    ids = resize_nearest(labels.ids, (h, w)).ravel()
    feats = tensor.data.reshape(c, h * w).astype(np.float64)

    counts = np.bincount(ids)
    valid = np.flatnonzero(counts >= MIN_SEGMENT_PIXELS)
    valid = valid[valid != 0]
    if valid.size < 2:
        raise NoValidSegments(
            f"need >= 2 segments with >= {MIN_SEGMENT_PIXELS} pixels, found {valid.size}"
        )

    keep = np.isin(ids, valid)
    ids_kept = ids[keep]
    feats_kept = feats[:, keep]
    # Compact segment ids to 0..L-1 for bincount accumulation.
    seg_index = np.searchsorted(valid, ids_kept)
    seg_counts = np.bincount(seg_index, minlength=valid.size).astype(np.float64)
    total = seg_counts.sum()
    weights = seg_counts / total

    sums = np.zeros((c, valid.size), dtype=np.float64)
    sqsums = np.zeros((c, valid.size), dtype=np.float64)
    for ch in range(c):
        sums[ch] = np.bincount(seg_index, weights=feats_kept[ch], minlength=valid.size)
        sqsums[ch] = np.bincount(seg_index, weights=feats_kept[ch] ** 2, minlength=valid.size)
    mu = sums / seg_counts
    var = np.maximum(sqsums / seg_counts - mu**2, 0.0)

    gmean = (mu * weights).sum(axis=1, keepdims=True)
    inter = float((((mu - gmean) ** 2) * weights).sum(axis=1).mean())
    intra = float((var * weights).sum(axis=1).mean())
    if inter + intra == 0.0:
        return 0.0
    return inter / (inter + intra)


@dataclass(frozen=True)
class OutcomePair:
    """A metric value paired with an externally measured outcome."""

    key: str
    metric_value: float
    outcome_value: float


@dataclass(frozen=True)
class SpearmanReport:
    rho: float
    n: int
    keys: tuple[str, ...]
    metric_ranks: tuple[float, ...]
    outcome_ranks: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "n": self.n,
            "keys": list(self.keys),
            "metric_ranks": list(self.metric_ranks),
            "outcome_ranks": list(self.outcome_ranks),
        }


def correlate_profiles(pairs: list[OutcomePair]) -> SpearmanReport:
    """Spearman correlation between metric values and outcomes."""
    metric = np.array([p.metric_value for p in pairs], dtype=np.float64)
    outcome = np.array([p.outcome_value for p in pairs], dtype=np.float64)
    rho = spearman(metric, outcome)
    return SpearmanReport(
        rho=rho,
        n=len(pairs),
        keys=tuple(p.key for p in pairs),
        metric_ranks=tuple(_average_ranks(metric)),
        outcome_ranks=tuple(_average_ranks(outcome)),
    )
