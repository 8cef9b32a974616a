"""Edge fidelity of a feature stage.

How much of a stage's response lives on and near the image's edges,
how much of its energy sits above low spatial frequencies, and how far
it decorrelates under shifts. The product of the four terms (scaled by
alpha) is the stage's edge fidelity; it grows when a stage acts like an
edge detector rather than a region labeler.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch, TooSmall
from .image_ops import (
    EdgeBands,
    ScalarMap,
    extract_edge_centerlines,
    hann_power_spectrum,
    l2_norm_map,
    make_edge_bands,
    pca1_map,
    resize_bilinear,
    shifted_ncc,
    sobel_gradient,
)
from .tensor_store import FeatureTensor


@dataclass(frozen=True)
class EFParams:
    """Knobs for the edge-fidelity metrics."""

    r_in: float = 3.0
    r_out: float = 7.0
    rho_low: float = 0.15
    tau: float = 0.5
    gamma: float = 1.0 / 64.0
    alpha: float = 100.0
    radii_cap_fraction: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.r_in < self.r_out:
            raise ValueError(f"need 0 < r_in < r_out, got {self.r_in}, {self.r_out}")
        if not 0.0 < self.rho_low < 0.5 * np.sqrt(2.0):
            raise ValueError(f"rho_low must be in (0, sqrt(2)/2), got {self.rho_low}")
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must be in (0, 1), got {self.tau}")
        if self.gamma <= 0 or self.alpha <= 0:
            raise ValueError("gamma and alpha must be positive")
        if not 0.0 < self.radii_cap_fraction <= 0.5:
            raise ValueError(
                f"radii_cap_fraction must be in (0, 0.5], got {self.radii_cap_fraction}"
            )

    def to_dict(self) -> dict:
        return {
            "r_in": self.r_in,
            "r_out": self.r_out,
            "rho_low": self.rho_low,
            "tau": self.tau,
            "gamma": self.gamma,
            "alpha": self.alpha,
            "radii_cap_fraction": self.radii_cap_fraction,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class EFResult:
    ec: float
    nc: float
    fc: float
    sp: float
    ef: float
    r_tau_px: float
    flags: tuple[str, ...] = ()


def _band_fraction(gradient: ScalarMap, band: np.ndarray, name: str) -> tuple[float, tuple[str, ...]]:
    if band.shape != gradient.values.shape:
        raise ShapeMismatch(
            f"band {band.shape} does not match gradient {gradient.values.shape}"
        )
    g = gradient.values.astype(np.float64)
    total = float(g.sum())
    if total <= 0.0:
        return 0.0, (f"{name}_zero_gradient",)
    if not band.any():
        return 0.0, (f"{name}_empty_band",)
    return float(g[band].sum()) / total, ()


def ec(gradient: ScalarMap, bands: EdgeBands) -> float:
    """Fraction of gradient mass inside the edge core band."""
    value, _ = _band_fraction(gradient, bands.core, "ec")
    return value


def nc(gradient: ScalarMap, bands: EdgeBands) -> float:
    """Fraction of gradient mass in the near-edge annulus."""
    value, _ = _band_fraction(gradient, bands.near, "nc")
    return value


def _fc(m: ScalarMap, rho_low: float) -> tuple[float, tuple[str, ...]]:
    if np.ptp(m.values) == 0:
        return 0.0, ("fc_constant",)
    power, rho = hann_power_spectrum(m)
    denom = float(power[rho > 0].sum())
    if denom <= 0.0:
        return 0.0, ("fc_no_power",)
    num = float(power[rho > rho_low].sum())
    return num / denom, ()


def fc(m: ScalarMap, rho_low: float = 0.15) -> float:
    """Fraction of non-DC spectral power above the rho_low cutoff.

    The DC bin is excluded from both numerator and denominator, so a
    pure offset does not dilute the ratio. A constant map scores 0.
    """
    value, _ = _fc(m, rho_low)
    return value


def _sp(m: ScalarMap, params: EFParams, stride: int) -> tuple[float, float, tuple[str, ...]]:
    side = min(m.height, m.width)
    if side < 8:
        raise TooSmall(f"shift persistence needs min side >= 8, got {side}")
    cap = int(np.floor(side * params.radii_cap_fraction))
    if cap < 1:
        raise TooSmall(f"radii cap {cap} below 1 for a {m.height}x{m.width} map")
    radii = [1]
    r = 2
    while r <= cap:
        radii.append(r)
        r *= 2

    flags: tuple[str, ...] = ()
    r_tau = None
    for radius in radii:
        if shifted_ncc(m, radius) < params.tau:
            r_tau = radius
            break
    if r_tau is None:
        r_tau = radii[-1]
        flags = ("sp_no_decorrelation",)
    r_tau_px = float(r_tau * stride)
    return 1.0 / (1.0 + params.gamma * r_tau_px), r_tau_px, flags


def sp(m: ScalarMap, params: EFParams, stride: int) -> float:
    """Shift persistence: how quickly self-similarity dies under shifts.

    Shift radii are 1 and successive powers of two up to
    floor(min(H, W) * radii_cap_fraction). The first radius whose mean
    shifted NCC drops below tau, converted to input pixels via the
    stride, sets sp = 1 / (1 + gamma * r_tau_px). Small sp means the
    map stays self-similar over long shifts (region-like); values near
    1 mean it decorrelates within a pixel or two (edge-like). If no
    tested radius decorrelates, the cap radius is used and flagged.
    """
    value, _, _ = _sp(m, params, stride)
    return value


def ef(
    tensor: FeatureTensor,
    image: ScalarMap,
    params: EFParams | None = None,
) -> EFResult:
    """Edge fidelity of one feature stage against its source image.

    The image is resized bilinearly to the stage grid and reduced to
    edge centerlines and bands. Edge and near-edge concentration are
    measured on the Sobel gradient of the stage's first-PC map; the
    frequency and shift terms are measured on the stage's z-scored
    channel-norm map. ef = alpha * ec * nc * fc * sp.
    """
    p = params or EFParams()
    h, w = tensor.height, tensor.width
    resized = ScalarMap(
        np.clip(resize_bilinear(image.values, (h, w)), 0.0, 1.0).astype(np.float32),
        "raw",
    )
    centerlines = extract_edge_centerlines(resized)
    flags: list[str] = []
    if not centerlines.any():
        flags.append("empty_centerlines")
        ec_value, nc_value = 0.0, 0.0
    else:
        bands = make_edge_bands(centerlines, p.r_in, p.r_out)
        proj = pca1_map(tensor, p.seed)
        if np.ptp(proj.values) == 0:
            flags.append("pca1_constant")
        gradient = sobel_gradient(proj)
        ec_value, ec_flags = _band_fraction(gradient, bands.core, "ec")
        nc_value, nc_flags = _band_fraction(gradient, bands.near, "nc")
        flags.extend(ec_flags)
        flags.extend(nc_flags)

    norm = l2_norm_map(tensor)
    fc_value, fc_flags = _fc(norm, p.rho_low)
    flags.extend(fc_flags)
    sp_value, r_tau_px, sp_flags = _sp(norm, p, tensor.stride)
    flags.extend(sp_flags)

    ef_value = p.alpha * ec_value * nc_value * fc_value * sp_value
    return EFResult(
        ec=ec_value,
        nc=nc_value,
        fc=fc_value,
        sp=sp_value,
        ef=ef_value,
        r_tau_px=r_tau_px,
        flags=tuple(flags),
    )
