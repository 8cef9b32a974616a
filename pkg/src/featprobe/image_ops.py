"""Classical image operations feeding the metrics.

Channel compressions, Sobel gradients, edge-centerline extraction,
Euclidean-disc dilation and band construction, Hann-windowed power
spectra, and shifted normalized cross-correlation. All functions are
pure; convolutions use replicate padding so borders do not fabricate
gradients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy import ndimage

from . import kernels
from .errors import BadRadii, ShiftTooLarge, TooSmall

if TYPE_CHECKING:
    from .tensor_store import FeatureTensor

NORM_TAGS = ("raw", "unit_range", "zscore")


@dataclass(frozen=True)
class ScalarMap:
    """Single-channel float32 grid with a normalization tag."""

    values: np.ndarray
    norm: str = "raw"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        if v.ndim != 2:
            raise ValueError(f"ScalarMap expects a 2-D grid, got shape {v.shape}")
        if not np.isfinite(v).all():
            raise ValueError("ScalarMap values must be finite")
        if self.norm not in NORM_TAGS:
            raise ValueError(f"unknown normalization tag {self.norm!r}")
        if self.norm == "unit_range" and ((v.min() < 0.0) or (v.max() > 1.0)):
            raise ValueError("unit_range map outside [0, 1]")
        if self.norm == "zscore" and v.size > 1:
            mean = float(v.astype(np.float64).mean())
            std = float(v.astype(np.float64).std())
            constant = std == 0.0 and np.all(v == 0.0)
            if not constant and (abs(mean) >= 1e-4 or abs(std - 1.0) >= 1e-3):
                raise ValueError("zscore map is not standardized")
        object.__setattr__(self, "values", v)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class EdgeBands:
    """Edge core and near-edge annulus dilated from centerlines."""

    centerlines: np.ndarray
    core: np.ndarray
    near: np.ndarray
    r_in: float
    r_out: float

    def __post_init__(self):
        if self.core.shape != self.centerlines.shape or self.near.shape != self.centerlines.shape:
            raise ValueError("band masks must share the centerline shape")
        if np.logical_and(self.core, self.near).any():
            raise ValueError("core and near bands overlap")


def channel_mean_map(tensor: FeatureTensor) -> ScalarMap:
    """Per-pixel arithmetic mean over channels."""
    mean = tensor.data.astype(np.float64).mean(axis=0)
    return ScalarMap(mean.astype(np.float32), "raw")


def pca1_map(tensor: FeatureTensor, seed: int = 0) -> ScalarMap:
    """First-principal-component projection, min-max normalized to [0, 1].

    Pixels are treated as channel-dimensional points. The component sign
    is chosen so the projection correlates non-negatively with the
    channel-mean map (falling back to the positive-max convention of
    pca_project when the correlation is exactly zero). A tensor whose
    pixels are all identical has no principal direction and maps to the
    declared degenerate value 0.5 everywhere.
    """
    from .numerics import PointMatrix, pca_project

    c, h, w = tensor.data.shape
    pixels = tensor.data.reshape(c, h * w).T
    if np.all(pixels == pixels[0]):
        return ScalarMap(np.full((h, w), 0.5, dtype=np.float32), "unit_range")

    scores, _ = pca_project(PointMatrix.from_array(pixels), 1, seed)
    proj = scores.data[:, 0].astype(np.float64)
    mean_map = tensor.data.astype(np.float64).mean(axis=0).ravel()
    corr = float(np.dot(proj - proj.mean(), mean_map - mean_map.mean()))
    if corr < 0:
        proj = -proj
    lo, hi = proj.min(), proj.max()
    if hi == lo:
        flat = np.full(h * w, 0.5, dtype=np.float32)
    else:
        flat = ((proj - lo) / (hi - lo)).astype(np.float32)
    return ScalarMap(flat.reshape(h, w), "unit_range")


def l2_norm_map(tensor: FeatureTensor) -> ScalarMap:
    """Per-pixel Euclidean norm over channels, z-scored.

    A constant norm map standardizes to all zeros.
    """
    norms = np.sqrt((tensor.data.astype(np.float64) ** 2).sum(axis=0))
    std = norms.std()
    if std == 0.0:
        return ScalarMap(np.zeros_like(norms, dtype=np.float32), "zscore")
    z = (norms - norms.mean()) / std
    return ScalarMap(z.astype(np.float32), "zscore")


_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
_SOBEL_Y = _SOBEL_X.T


def _sobel_xy(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    v = np.pad(values.astype(np.float64), 1, mode="edge")
    gx = np.zeros(values.shape, dtype=np.float64)
    gy = np.zeros(values.shape, dtype=np.float64)
    h, w = values.shape
    for dy in range(3):
        for dx in range(3):
            win = v[dy : dy + h, dx : dx + w]
            if _SOBEL_X[dy, dx]:
                gx += _SOBEL_X[dy, dx] * win
            if _SOBEL_Y[dy, dx]:
                gy += _SOBEL_Y[dy, dx] * win
    return gx, gy


def sobel_gradient(m: ScalarMap) -> ScalarMap:
    """3x3 Sobel gradient magnitude with replicate border padding."""
    if m.height < 3 or m.width < 3:
        raise TooSmall(f"sobel needs at least 3x3, got {m.height}x{m.width}")
    gx, gy = _sobel_xy(m.values)
    return ScalarMap(np.hypot(gx, gy).astype(np.float32), "raw")


def extract_edge_centerlines(image: ScalarMap) -> np.ndarray:
    """One-pixel-wide edge centerlines of an intensity image.

    Sobel magnitude, non-maximum suppression along the quantized
    gradient direction, then a rank threshold keeping pixels at or above
    the 90th percentile of the nonzero suppressed magnitudes. The rank
    threshold makes the mask invariant to positive affine rescaling of
    the input. A constant image yields an empty mask.
    """
    if image.height < 3 or image.width < 3:
        raise TooSmall(f"centerline extraction needs at least 3x3, got {image.height}x{image.width}")
    gx, gy = _sobel_xy(image.values)
    mag = np.hypot(gx, gy)
    suppressed = kernels.nms_suppress(mag, gx, gy)
    nonzero = suppressed[suppressed > 0]
    if nonzero.size == 0:
        return np.zeros(image.values.shape, dtype=bool)
    threshold = np.percentile(nonzero, 90.0)
    return suppressed >= threshold


def dilate_disc(mask: np.ndarray, radius: float) -> np.ndarray:
    """Exact Euclidean-disc dilation of a binary mask.

    A pixel is set iff its Euclidean distance to the nearest set pixel
    is <= radius, computed via an exact distance transform rather than
    iterated structuring elements.
    """
    if radius < 0:
        raise BadRadii(f"radius must be >= 0, got {radius}")
    m = np.asarray(mask, dtype=bool)
    if radius == 0 or not m.any():
        return m.copy()
    dist = ndimage.distance_transform_edt(~m)
    return dist <= radius


def make_edge_bands(centerlines: np.ndarray, r_in: float, r_out: float) -> EdgeBands:
    """Edge core (within r_in) and the annulus between r_in and r_out."""
    if not r_in < r_out:
        raise BadRadii(f"need r_in < r_out, got {r_in} >= {r_out}")
    core = dilate_disc(centerlines, r_in)
    outer = dilate_disc(centerlines, r_out)
    near = outer & ~core
    return EdgeBands(np.asarray(centerlines, dtype=bool), core, near, r_in, r_out)


def hann_power_spectrum(m: ScalarMap) -> tuple[np.ndarray, np.ndarray]:
    """Hann-windowed 2-D power spectrum and its radial frequency grid.

    A separable periodic Hann window w(n) = 0.5 - 0.5 cos(2 pi n / M) is
    applied before the unnormalized DFT, so Parseval reads
    sum(P) == H * W * sum((w * m)**2). Frequencies are normalized per
    axis (Nyquist = 0.5); rho = sqrt(fu^2 + fv^2) in [0, sqrt(2)/2] with
    the DC bin at rho = 0.
    """
    h, w = m.values.shape
    if h < 4 or w < 4:
        raise TooSmall(f"power spectrum needs at least 4x4, got {h}x{w}")
    wy = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(h) / h)
    wx = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(w) / w)
    windowed = m.values.astype(np.float64) * np.outer(wy, wx)
    power = np.abs(np.fft.fft2(windowed)) ** 2
    fy = np.fft.fftfreq(h)
    fx = np.fft.fftfreq(w)
    rho = np.hypot(fy[:, None], fx[None, :])
    return power, rho


_DIAG = 1.0 / np.sqrt(2.0)


def _shift_offsets(r: int) -> list[tuple[int, int]]:
    d = int(round(r * _DIAG))
    return [
        (r, 0), (-r, 0), (0, r), (0, -r),
        (d, d), (d, -d), (-d, d), (-d, -d),
    ]


def _overlap_ncc(values: np.ndarray, dy: int, dx: int) -> float:
    h, w = values.shape
    a = values[max(0, dy) : h + min(0, dy), max(0, dx) : w + min(0, dx)]
    b = values[max(0, -dy) : h + min(0, -dy), max(0, -dx) : w + min(0, -dx)]
    za = a.astype(np.float64) - a.mean(dtype=np.float64)
    zb = b.astype(np.float64) - b.mean(dtype=np.float64)
    na = float((za * za).sum())
    nb = float((zb * zb).sum())
    if na == 0.0 or nb == 0.0:
        return 1.0
    return float((za * zb).sum() / np.sqrt(na * nb))


def shifted_ncc(m: ScalarMap, r: int) -> float:
    """Mean NCC between a map and itself shifted by r in 8 directions.

    Offsets are (+-r, 0), (0, +-r), and the four diagonals at
    +-round(r / sqrt(2)) per axis, so diagonal shift lengths are close
    to r. The NCC of each direction is computed on the overlap region
    with per-region mean subtraction; a zero-variance overlap counts as
    1 by convention.
    """
    if r < 1:
        raise ShiftTooLarge(f"shift radius must be >= 1, got {r}")
    if r >= min(m.height, m.width) / 2:
        raise ShiftTooLarge(
            f"shift {r} too large for {m.height}x{m.width} map"
        )
    vals = [_overlap_ncc(m.values, dy, dx) for dy, dx in _shift_offsets(r)]
    return float(np.mean(vals))


def resize_bilinear(values: np.ndarray, out_hw: tuple[int, int]) -> np.ndarray:
    """Bilinear resample with half-pixel-center alignment, edge clamped."""
    h, w = values.shape
    oh, ow = out_hw
    if oh == h and ow == w:
        return values.astype(np.float64).copy()
    sy = h / oh
    sx = w / ow
    ys = (np.arange(oh) + 0.5) * sy - 0.5
    xs = (np.arange(ow) + 0.5) * sx - 0.5
    y0 = np.clip(np.floor(ys), 0, h - 1).astype(np.int64)
    x0 = np.clip(np.floor(xs), 0, w - 1).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = np.clip(ys - y0, 0.0, 1.0)[:, None]
    fx = np.clip(xs - x0, 0.0, 1.0)[None, :]
    v = values.astype(np.float64)
    top = v[y0[:, None], x0[None, :]] * (1 - fx) + v[y0[:, None], x1[None, :]] * fx
    bot = v[y1[:, None], x0[None, :]] * (1 - fx) + v[y1[:, None], x1[None, :]] * fx
    return top * (1 - fy) + bot * fy


def resize_nearest(values: np.ndarray, out_hw: tuple[int, int]) -> np.ndarray:
    """Nearest-neighbor resample with half-pixel-center alignment."""
    h, w = values.shape
    oh, ow = out_hw
    ys = np.minimum((((np.arange(oh) + 0.5) * h) / oh).astype(np.int64), h - 1)
    xs = np.minimum((((np.arange(ow) + 0.5) * w) / ow).astype(np.int64), w - 1)
    return values[ys[:, None], xs[None, :]]
