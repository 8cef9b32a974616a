"""Release gate: reference fixtures, oracle equivalence, end-to-end properties.

Every check here is a shipping requirement. The reference-profile tests
pin the planner to the checked-in encoder tables; the oracle tests vet
the fast numeric paths against brute-force restatements; the property
tests exercise the full pipeline on synthetic encoder pairs.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from featprobe import prng
from featprobe.cli import main
from featprobe.ef_metrics import EFParams, ec, fc, nc, sp
from featprobe.fusion_planner import StrideProfile, assess_encoder, plan_from_profiles
from featprobe.image_ops import (
    ScalarMap,
    dilate_disc,
    hann_power_spectrum,
    make_edge_bands,
    pca1_map,
)
from featprobe.numerics import PointMatrix, kmeans, silhouette
from featprobe.sc_metrics import SCParams, scs, sfc
from featprobe.sensitivity import DEFAULT_GRIDS, SweepSpec, run_sweep
from featprobe.synth_bench import (
    inertia_of,
    make_encoder_pair,
    oracle_dft_power,
    oracle_distance_transform,
    oracle_kmeans_inertia,
    oracle_pca_scores,
    oracle_silhouette,
)
from featprobe.tensor_store import FeatureTensor
from featprobe.validation import OutcomePair, correlate_profiles


def profiles_of(doc: dict) -> list[StrideProfile]:
    return [StrideProfile.from_dict(e) for e in doc["encoders"]]


class TestReferenceProfiles:
    """Planner decisions on the checked-in encoder profile tables."""

    def test_default_roles_and_injection(self, cityscapes_profiles):
        profiles = profiles_of(cityscapes_profiles)
        t0 = time.perf_counter()
        plan = plan_from_profiles(profiles)
        elapsed = time.perf_counter() - t0
        assert elapsed < 1.0

        assert plan.master == "DINOv3"
        assert plan.aux == "SAM2"
        assert plan.injection_stride == 16
        assert plan.rationale["master_mean_sc"] == pytest.approx(0.655, abs=1e-9)
        assert plan.rationale["aux_mean_sc"] == pytest.approx(0.3625, abs=1e-9)
        assert plan.rationale["aux_metric_by_stride"]["16"] == pytest.approx(17.13, abs=1e-9)

    def test_master_override_flips_injection(self, cityscapes_profiles):
        plan = plan_from_profiles(profiles_of(cityscapes_profiles), master_override="SAM2")
        assert plan.master == "SAM2"
        assert plan.aux == "DINOv3"
        assert plan.injection_stride == 32
        assert plan.rationale["aux_metric_by_stride"]["32"] == pytest.approx(5.88, abs=1e-9)

    def test_second_profile_table(self, coco_profiles):
        plan = plan_from_profiles(profiles_of(coco_profiles))
        assert plan.master == "DINOv3"
        assert plan.aux == "SAM2"
        assert plan.injection_stride == 16
        assert plan.rationale["aux_metric_by_stride"]["16"] == pytest.approx(12.83, abs=1e-9)


class TestRankCorrelationReference:
    def test_published_pairs_give_point_eight(self, outcome_pairs):
        pairs = [
            OutcomePair(p["key"], p["metric_value"], p["outcome_value"])
            for p in outcome_pairs
        ]
        assert correlate_profiles(pairs).rho == pytest.approx(0.80, abs=1e-9)


ORACLE_TIMES: list[float] = []


class TestOracleEquivalence:
    """Fast paths against brute-force oracles, under a shared time budget."""

    @pytest.fixture(autouse=True)
    def _timed(self):
        t0 = time.perf_counter()
        yield
        ORACLE_TIMES.append(time.perf_counter() - t0)

    @pytest.mark.parametrize("n,k,seed", [(60, 3, 1), (150, 5, 2), (200, 4, 3)])
    def test_silhouette(self, n, k, seed):
        pts = PointMatrix.from_array(
            prng.normals(seed, n * 4).reshape(n, 4).astype(np.float32)
        )
        assign = kmeans(pts, k, seed=seed)
        assert abs(silhouette(pts, assign) - oracle_silhouette(pts, assign)) < 1e-6

    @pytest.mark.parametrize("h,w", [(16, 16), (32, 48), (64, 64)])
    def test_windowed_power_spectrum(self, h, w):
        vals = prng.normals(h * 97 + w, h * w).reshape(h, w).astype(np.float32)
        power, _ = hann_power_spectrum(ScalarMap(vals, "raw"))
        wy = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(h) / h)
        wx = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(w) / w)
        windowed = (vals.astype(np.float64) * np.outer(wy, wx)).astype(np.float32)
        want = oracle_dft_power(ScalarMap(windowed, "raw"))
        # Relative per bin where the oracle has real power; bins at the
        # noise floor are held to an absolute share of the peak instead.
        peak = want.max()
        strong = want > 1e-9 * peak
        assert (np.abs(power - want)[strong] / want[strong]).max() < 1e-4
        if (~strong).any():
            assert np.abs(power - want)[~strong].max() < 1e-6 * peak

    @pytest.mark.parametrize("seed,radius", [(11, 1.0), (12, 2.5), (13, 4.0)])
    def test_disc_dilation(self, seed, radius):
        mask = prng.uniforms(seed, 48 * 48).reshape(48, 48) < 0.05
        got = dilate_disc(mask, radius)
        want = oracle_distance_transform(mask) <= radius
        np.testing.assert_array_equal(got, want)

    def test_first_component_projection(self):
        c, h, w = 16, 8, 8
        data = prng.normals(77, c * h * w).reshape(c, h, w).astype(np.float32)
        pixels = data.reshape(c, h * w).T
        scores, _ = oracle_pca_scores(PointMatrix.from_array(pixels), 1)
        proj = scores[:, 0].astype(np.float64)
        mean_map = data.astype(np.float64).mean(axis=0).ravel()
        if np.dot(proj - proj.mean(), mean_map - mean_map.mean()) < 0:
            proj = -proj
        expected = (proj - proj.min()) / (proj.max() - proj.min())
        got = pca1_map(FeatureTensor(data, 8)).values.astype(np.float64).ravel()
        assert np.abs(got - expected).max() < 1e-5

    @pytest.mark.parametrize("seed", range(8))
    def test_kmeans_reaches_exhaustive_optimum(self, seed):
        # Eight-point instances with separated blobs; the exhaustive
        # oracle enumerates all 3^8 labelings.
        s = prng.Stream(100 + seed)
        parts = [
            c + 0.5 * s.normals(m * 2).reshape(m, 2)
            for c, m in zip(([0.0, 0.0], [6.0, 0.0], [0.0, 6.0]), (3, 3, 2))
        ]
        pts = PointMatrix.from_array(np.concatenate(parts).astype(np.float32))
        assign = kmeans(pts, 3, seed=seed)
        assert inertia_of(pts, assign) == pytest.approx(
            oracle_kmeans_inertia(pts, 3), rel=1e-6, abs=1e-9
        )

    def test_suite_runtime_within_budget(self):
        assert sum(ORACLE_TIMES) < 60.0


class TestAnalyticFixtures:
    """Closed-form inputs whose metric values are known exactly."""

    def test_sfc_one_on_aligned_piecewise_constant(self):
        cells = prng.normals(21, 2 * 16).reshape(2, 4, 4)
        data = np.stack([np.kron(ch, np.ones((4, 4))) for ch in cells])
        t = FeatureTensor(data.astype(np.float32), 8)
        assert sfc(t, SCParams(grid_k=4)) == 1.0

    def test_sfc_half_when_between_equals_within(self):
        # Patch means alternate 0/1 (variance 0.25) and every patch holds
        # mean +- 0.5 (within variance 0.25), so the ratio is exactly half.
        patch = np.array([[-0.5, 0.5], [0.5, -0.5]])
        m = np.block([[patch, patch + 1.0], [patch + 1.0, patch]])
        t = FeatureTensor(m[None].astype(np.float32), 8)
        assert sfc(t, SCParams(grid_k=2)) == pytest.approx(0.5, abs=1e-6)

    def test_scs_half_on_constant_input(self):
        t = FeatureTensor(np.full((4, 12, 12), 2.0, dtype=np.float32), 8)
        assert scs(t, SCParams(grid_k=2)) == 0.5

    def test_band_fractions_on_centerline_concentrated_gradient(self):
        centerlines = np.zeros((17, 17), dtype=bool)
        centerlines[:, 8] = True
        bands = make_edge_bands(centerlines, 3.0, 7.0)
        gradient = ScalarMap(centerlines.astype(np.float32), "raw")
        assert ec(gradient, bands) == 1.0
        assert nc(gradient, bands) == 0.0

    @pytest.mark.parametrize(
        "fx,check", [(0.25, lambda v: v >= 0.99), (0.05, lambda v: v <= 0.05)]
    )
    def test_fc_sinusoids(self, fx, check):
        _, xs = np.mgrid[0:64, 0:64]
        v = np.cos(2 * np.pi * fx * xs).astype(np.float64)
        z = ((v - v.mean()) / v.std()).astype(np.float32)
        assert check(fc(ScalarMap(z, "zscore"), 0.15))

    def test_sp_on_period_two_checkerboard(self):
        ys, xs = np.mgrid[0:16, 0:16]
        board = np.where((ys + xs) % 2 == 0, 1.0, -1.0)
        z = ((board - board.mean()) / board.std()).astype(np.float32)
        # Decorrelates at radius 1 cell = 16 px: 1 / (1 + 16/64) = 0.8.
        got = sp(ScalarMap(z, "zscore"), EFParams(), stride=16)
        assert got == pytest.approx(0.8, abs=1e-6)


class TestBiasSeparation:
    def test_structure_edge_diagnosis_across_seeds(self):
        t0 = time.perf_counter()
        sc_correct = 0
        ef_correct = 0
        for seed in range(10):
            structure, edge = make_encoder_pair(seed=seed)
            structure_profile = assess_encoder(structure)
            edge_profile = assess_encoder(edge)
            sc_correct += structure_profile.mean_sc() > edge_profile.mean_sc()
            argmax = max(edge_profile.rows, key=lambda s: edge_profile.rows[s]["ef"])
            ef_correct += argmax == 16
        elapsed = time.perf_counter() - t0
        assert sc_correct >= 9
        assert ef_correct >= 9
        assert elapsed < 120.0


class TestSensitivityStability:
    @pytest.mark.parametrize("parameter", sorted(DEFAULT_GRIDS))
    def test_orderings_hold_across_published_grid(self, parameter, encoder_pair):
        spec = SweepSpec(
            parameter,
            assertions=(
                {"kind": "mean_sc_order", "higher": "synth-structure", "lower": "synth-edge"},
                {"kind": "ef_argmax", "encoder": "synth-edge", "stride": 16},
            ),
        )
        report = run_sweep(spec, encoder_pair)
        assert len(report["points"]) == len(DEFAULT_GRIDS[parameter])
        assert report["all_hold"] is True


class TestDeterministicReports:
    def test_byte_identical_at_any_thread_count(self, pair_manifests, tmp_path):
        outs = []
        for name, threads in (("a", 1), ("b", 1), ("c", 2), ("d", 4)):
            out = tmp_path / f"{name}.json"
            argv = ["assess"]
            for manifest in pair_manifests:
                argv += ["--manifest", str(manifest)]
            argv += ["--threads", str(threads), "--no-timestamp", "--out", str(out)]
            assert main(argv) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1] == outs[2] == outs[3]
        # Sanity: the identical reports parse and carry both encoders.
        doc = json.loads(outs[0])
        assert [e["encoder_id"] for e in doc["encoders"]] == [
            "synth-edge",
            "synth-structure",
        ]
