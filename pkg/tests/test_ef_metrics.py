"""Edge fidelity suite: band fractions, spectra, shift persistence."""

import numpy as np
import pytest

from featprobe import prng
from featprobe.ef_metrics import EFParams, ec, ef, fc, nc, sp
from featprobe.errors import ShapeMismatch, TooSmall
from featprobe.image_ops import ScalarMap, make_edge_bands
from featprobe.synth_bench import SynthSpec, blur_tensor, generate
from featprobe.tensor_store import FeatureTensor


def zscored(values: np.ndarray) -> ScalarMap:
    v = values.astype(np.float64)
    z = (v - v.mean()) / v.std()
    return ScalarMap(z.astype(np.float32), "zscore")


def line_bands(h: int = 20, w: int = 20, col: int = 10, r_in: float = 1, r_out: float = 3):
    mask = np.zeros((h, w), dtype=bool)
    mask[:, col] = True
    return make_edge_bands(mask, r_in, r_out)


class TestBandFractions:
    def test_gradient_on_centerline_gives_ec_one(self):
        bands = line_bands()
        g = np.zeros((20, 20), dtype=np.float32)
        g[:, 10] = 2.0
        grad = ScalarMap(g, "raw")
        assert ec(grad, bands) == 1.0
        assert nc(grad, bands) == 0.0

    def test_gradient_outside_outer_band_gives_zero(self):
        bands = line_bands()
        g = np.zeros((20, 20), dtype=np.float32)
        g[:, 0] = 1.0  # distance 10 from the line, outside r_out = 3
        grad = ScalarMap(g, "raw")
        assert ec(grad, bands) == 0.0
        assert nc(grad, bands) == 0.0

    def test_gradient_in_annulus_only(self):
        bands = line_bands()
        g = np.where(bands.near, 1.0, 0.0).astype(np.float32)
        grad = ScalarMap(g, "raw")
        assert nc(grad, bands) == 1.0
        assert ec(grad, bands) == 0.0

    def test_uniform_gradient_matches_pixel_counts(self):
        bands = line_bands()
        grad = ScalarMap(np.ones((20, 20), dtype=np.float32), "raw")
        assert ec(grad, bands) == pytest.approx(bands.core.sum() / 400.0)
        assert nc(grad, bands) == pytest.approx(bands.near.sum() / 400.0)

    def test_ec_plus_nc_at_most_one(self):
        for seed in range(5):
            bands = line_bands()
            g = np.abs(prng.normals(seed, 400)).reshape(20, 20).astype(np.float32)
            grad = ScalarMap(g, "raw")
            assert ec(grad, bands) + nc(grad, bands) <= 1.0 + 1e-12

    def test_positive_scale_invariance(self):
        bands = line_bands()
        g = np.abs(prng.normals(50, 400)).reshape(20, 20).astype(np.float32)
        a = ec(ScalarMap(g, "raw"), bands)
        b = ec(ScalarMap(7.5 * g, "raw"), bands)
        assert b == pytest.approx(a, rel=1e-6)

    def test_zero_gradient_scores_zero(self):
        bands = line_bands()
        assert ec(ScalarMap(np.zeros((20, 20), dtype=np.float32), "raw"), bands) == 0.0

    def test_shape_mismatch(self):
        bands = line_bands()
        with pytest.raises(ShapeMismatch):
            ec(ScalarMap(np.ones((10, 10), dtype=np.float32), "raw"), bands)


class TestFc:
    def test_constant_map_zero(self):
        assert fc(ScalarMap(np.zeros((16, 16), dtype=np.float32), "zscore")) == 0.0

    def test_high_frequency_cosine(self):
        _, xs = np.mgrid[0:64, 0:64]
        m = zscored(np.cos(2 * np.pi * 0.25 * xs))
        assert fc(m, 0.15) >= 0.99

    def test_low_frequency_cosine(self):
        _, xs = np.mgrid[0:64, 0:64]
        m = zscored(np.cos(2 * np.pi * 0.05 * xs))
        assert fc(m, 0.15) <= 0.05

    def test_affine_invariance_through_zscore(self):
        vals = prng.normals(51, 32 * 32).reshape(32, 32)
        a = fc(zscored(vals), 0.15)
        b = fc(zscored(-4.0 * vals + 11.0), 0.15)
        # Negation mirrors the spectrum; power is unchanged.
        assert b == pytest.approx(a, rel=1e-5)

    def test_cutoff_monotone(self):
        m = zscored(prng.normals(52, 24 * 24).reshape(24, 24))
        vals = [fc(m, rho) for rho in (0.05, 0.15, 0.3, 0.5)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_too_small(self):
        vals = prng.uniforms(55, 3 * 16).reshape(3, 16).astype(np.float32)
        with pytest.raises(TooSmall):
            fc(ScalarMap(vals, "raw"), 0.15)


class TestSp:
    def test_checkerboard_at_stride_16(self):
        board = generate(SynthSpec("checkerboard", {"h": 16, "w": 16, "cell": 1}))
        m = ScalarMap(board.values, "zscore")  # +-1 grid is already standardized
        assert sp(m, EFParams(), 16) == pytest.approx(0.8, abs=1e-12)

    def test_constant_map_hits_cap_with_flag(self):
        from featprobe.ef_metrics import _sp

        m = ScalarMap(np.zeros((16, 16), dtype=np.float32), "zscore")
        value, r_tau_px, flags = _sp(m, EFParams(), 16)
        # cap = floor(16 * 0.25) = 4 feature px -> 64 image px
        assert r_tau_px == 64.0
        assert value == pytest.approx(1.0 / 2.0)
        assert "sp_no_decorrelation" in flags

    def test_sharp_beats_blurred(self):
        from scipy.ndimage import gaussian_filter

        # A thin line decorrelates off itself within a pixel; blurring
        # stretches that out. (A full step edge never crosses tau at
        # all: shifts parallel to the edge keep NCC near 1.)
        line = np.zeros((32, 32))
        line[:, 16] = 1.0
        sharp = zscored(line + 0.01 * prng.normals(53, 1024).reshape(32, 32))
        blurred = zscored(
            gaussian_filter(line, sigma=4.0)
            + 0.01 * prng.normals(53, 1024).reshape(32, 32)
        )
        p = EFParams()
        assert sp(sharp, p, 8) > sp(blurred, p, 8)

    def test_radius_one_always_tested(self):
        m = zscored(prng.normals(54, 8 * 8).reshape(8, 8))
        value = sp(m, EFParams(), 4)
        assert 0.0 < value <= 1.0

    def test_too_small(self):
        with pytest.raises(TooSmall):
            sp(ScalarMap(np.zeros((7, 20), dtype=np.float32), "zscore"), EFParams(), 4)


def ridge_pair(seed: int, stride: int = 16):
    """A feature stage with a sharp line response plus its source image."""
    t = generate(
        SynthSpec(
            "ridge_tensor",
            {"h": 40, "w": 40, "channels": 8, "column": 20, "stride": stride},
            seed=seed,
        )
    )
    img = np.zeros((40 * stride, 40 * stride), dtype=np.float32)
    img[:, 20 * stride :] = 1.0
    return t, ScalarMap(img, "raw")


class TestEfPipeline:
    def test_compositional_identity(self):
        t, img = ridge_pair(0)
        res = ef(t, img)
        assert res.ef == pytest.approx(
            100.0 * res.ec * res.nc * res.fc * res.sp, rel=1e-6
        )
        for v in (res.ec, res.nc, res.fc, res.sp):
            assert 0.0 <= v <= 1.0
        assert res.ec + res.nc <= 1.0 + 1e-7

    def test_sharp_response_beats_blurred(self):
        wins = 0
        for seed in range(10):
            t, img = ridge_pair(seed)
            blurred = blur_tensor(t, 4.0)
            if ef(t, img).ef > ef(blurred, img).ef:
                wins += 1
        assert wins >= 9

    def test_constant_image_flags_empty_centerlines(self):
        t, _ = ridge_pair(1)
        img = ScalarMap(np.full((640, 640), 0.5, dtype=np.float32), "raw")
        res = ef(t, img)
        assert "empty_centerlines" in res.flags
        assert res.ec == 0.0 and res.nc == 0.0 and res.ef == 0.0

    def test_constant_tensor_zero_ef(self):
        _, img = ridge_pair(2)
        t = FeatureTensor(np.ones((4, 40, 40), dtype=np.float32), 16)
        res = ef(t, img)
        assert res.ef == 0.0
        assert "fc_constant" in res.flags
        assert "pca1_constant" in res.flags

    def test_deterministic(self):
        t, img = ridge_pair(3)
        assert ef(t, img) == ef(t, img)


class TestParams:
    def test_defaults(self):
        p = EFParams()
        assert (p.r_in, p.r_out, p.rho_low, p.tau) == (3.0, 7.0, 0.15, 0.5)
        assert p.gamma == pytest.approx(1.0 / 64.0)
        assert p.alpha == 100.0
        assert p.radii_cap_fraction == 0.25

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"r_in": 7, "r_out": 3},
            {"r_in": 0},
            {"rho_low": 0.9},
            {"tau": 1.5},
            {"gamma": 0.0},
            {"alpha": -1.0},
            {"radii_cap_fraction": 0.8},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            EFParams(**kwargs)
