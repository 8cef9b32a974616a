"""Turns per-stride metric profiles into a master-auxiliary fusion plan.

The encoder with the highest mean structural coherence supplies the
backbone pyramid (the master); the other encoder is injected at the
single stride where its edge fidelity peaks. The plan is a plain JSON
document so downstream consumers never need this package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .ef_metrics import EFParams, ef
from .errors import BadSpec, SameEncoder, TooFewProfiles
from .sc_metrics import SCParams, sc
from .tensor_store import FEATURE_STRIDES, EncoderFeatureSet

REQUIRED_ROW_FIELDS = ("sc", "ef")
INJECTION_METRICS = ("ef", "sc")


@dataclass(frozen=True)
class StrideProfile:
    """Per-stride metric rows for one encoder."""

    encoder_id: str
    rows: dict[int, dict]
    params_echo: dict = field(default_factory=dict)

    def __post_init__(self):
        for s in FEATURE_STRIDES:
            if s not in self.rows:
                raise BadSpec(f"profile {self.encoder_id!r} missing stride {s}")
        for s, row in self.rows.items():
            for name in REQUIRED_ROW_FIELDS:
                v = row.get(name)
                if not isinstance(v, (int, float)) or not np.isfinite(v):
                    raise BadSpec(
                        f"profile {self.encoder_id!r} stride {s}: bad {name} value {v!r}"
                    )

    def mean_sc(self) -> float:
        return float(np.mean([self.rows[s]["sc"] for s in FEATURE_STRIDES]))

    def to_dict(self) -> dict:
        return {
            "encoder_id": self.encoder_id,
            "rows": {str(s): dict(self.rows[s]) for s in FEATURE_STRIDES},
            "params": dict(self.params_echo),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> StrideProfile:
        if not isinstance(doc, dict) or "encoder_id" not in doc or "rows" not in doc:
            raise BadSpec("profile document needs encoder_id and rows")
        rows = {}
        for key, row in doc["rows"].items():
            try:
                stride = int(key)
            except (TypeError, ValueError) as err:
                raise BadSpec(f"bad stride key {key!r}") from err
            if not isinstance(row, dict):
                raise BadSpec(f"stride {key} row must be an object")
            rows[stride] = dict(row)
        return cls(doc["encoder_id"], rows, dict(doc.get("params", {})))


def compute_sc_rows(fs: EncoderFeatureSet, params: SCParams) -> dict[int, dict]:
    rows: dict[int, dict] = {}
    for stride, tensor in fs.stages():
        try:
            r = sc(tensor, params)
        except Exception as err:
            err.args = (f"{fs.encoder_id} stride {stride}: {err}",)
            raise
        rows[stride] = {
            "sfc": r.sfc,
            "scs": r.scs,
            "sc": r.sc,
            "flags": list(r.flags),
        }
    return rows


def compute_ef_rows(fs: EncoderFeatureSet, params: EFParams) -> dict[int, dict]:
    rows: dict[int, dict] = {}
    for stride, tensor in fs.stages():
        try:
            r = ef(tensor, fs.image, params)
        except Exception as err:
            err.args = (f"{fs.encoder_id} stride {stride}: {err}",)
            raise
        rows[stride] = {
            "ec": r.ec,
            "nc": r.nc,
            "fc": r.fc,
            "sp": r.sp,
            "ef": r.ef,
            "r_tau_px": r.r_tau_px,
            "flags": list(r.flags),
        }
    return rows


def merge_rows(sc_rows: dict[int, dict], ef_rows: dict[int, dict]) -> dict[int, dict]:
    rows = {}
    for s in FEATURE_STRIDES:
        merged = dict(sc_rows[s])
        ef_row = dict(ef_rows[s])
        merged["flags"] = sorted(set(merged["flags"]) | set(ef_row.pop("flags")))
        merged.update(ef_row)
        rows[s] = merged
    return rows


def assess_encoder(
    fs: EncoderFeatureSet,
    sc_params: SCParams | None = None,
    ef_params: EFParams | None = None,
) -> StrideProfile:
    """Run both metric families on every stage of one encoder."""
    scp = sc_params or SCParams()
    efp = ef_params or EFParams()
    rows = merge_rows(compute_sc_rows(fs, scp), compute_ef_rows(fs, efp))
    return StrideProfile(fs.encoder_id, rows, {"sc": scp.to_dict(), "ef": efp.to_dict()})


def select_master(profiles: Iterable[StrideProfile]) -> str:
    """Encoder with the highest mean structural coherence across strides.

    Ties break lexicographically on encoder id so the choice is stable.
    """
    items = list(profiles)
    if len(items) < 2:
        raise TooFewProfiles(f"master selection needs >= 2 profiles, got {len(items)}")
    ids = [p.encoder_id for p in items]
    if len(set(ids)) != len(ids):
        raise SameEncoder("profiles must come from distinct encoders")
    best = min(items, key=lambda p: (-p.mean_sc(), p.encoder_id))
    return best.encoder_id


def select_injection_stride(profile: StrideProfile, metric: str = "ef") -> int:
    """Stride where the profile's chosen metric peaks (ties -> largest)."""
    if metric not in INJECTION_METRICS:
        raise BadSpec(f"injection metric must be one of {INJECTION_METRICS}, got {metric!r}")
    best_stride = None
    best_value = -np.inf
    for s in sorted(FEATURE_STRIDES, reverse=True):
        v = float(profile.rows[s][metric])
        if v > best_value:
            best_value = v
            best_stride = s
    return int(best_stride)


@dataclass(frozen=True)
class FusionPlan:
    master: str
    aux: str
    injection_stride: int
    pyramid: dict[int, str]
    rationale: dict

    def to_dict(self) -> dict:
        return {
            "master": self.master,
            "aux": self.aux,
            "injection_stride": self.injection_stride,
            "pyramid": {str(s): self.pyramid[s] for s in FEATURE_STRIDES},
            "rationale": dict(self.rationale),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> FusionPlan:
        try:
            pyramid = {int(k): v for k, v in doc["pyramid"].items()}
            return cls(
                master=doc["master"],
                aux=doc["aux"],
                injection_stride=int(doc["injection_stride"]),
                pyramid=pyramid,
                rationale=dict(doc.get("rationale", {})),
            )
        except (KeyError, TypeError, ValueError) as err:
            raise BadSpec(f"bad plan document: {err}") from err


def build_fusion_plan(
    master_profile: StrideProfile,
    aux_profile: StrideProfile,
    injection_metric: str = "ef",
) -> FusionPlan:
    """Master everywhere, auxiliary at its single best stride."""
    if master_profile.encoder_id == aux_profile.encoder_id:
        raise SameEncoder(f"master and aux are both {master_profile.encoder_id!r}")
    stride = select_injection_stride(aux_profile, injection_metric)
    pyramid = {s: "master" for s in FEATURE_STRIDES}
    pyramid[stride] = "aux"
    rationale = {
        "injection_metric": injection_metric,
        "tie_break": "largest stride",
        "master_mean_sc": master_profile.mean_sc(),
        "aux_mean_sc": aux_profile.mean_sc(),
        "aux_metric_by_stride": {
            str(s): float(aux_profile.rows[s][injection_metric]) for s in FEATURE_STRIDES
        },
    }
    return FusionPlan(
        master=master_profile.encoder_id,
        aux=aux_profile.encoder_id,
        injection_stride=stride,
        pyramid=pyramid,
        rationale=rationale,
    )


def plan_from_profiles(
    profiles: Iterable[StrideProfile],
    master_override: str | None = None,
    injection_metric: str = "ef",
) -> FusionPlan:
    """Pick master and aux from a pool of profiles, then build the plan.

    The master is the mean-SC winner unless overridden. The auxiliary is
    the remaining profile whose peak injection metric is highest (ties
    lexicographic), which with two profiles is simply the other one.
    """
    items = {p.encoder_id: p for p in profiles}
    if len(items) < 2:
        raise TooFewProfiles(f"planning needs >= 2 profiles, got {len(items)}")
    if master_override is not None:
        if master_override not in items:
            raise BadSpec(f"unknown master {master_override!r}; have {sorted(items)}")
        master_id = master_override
    else:
        master_id = select_master(items.values())
    rest = [p for p in items.values() if p.encoder_id != master_id]
    aux = min(
        rest,
        key=lambda p: (
            -max(float(p.rows[s][injection_metric]) for s in FEATURE_STRIDES),
            p.encoder_id,
        ),
    )
    plan = build_fusion_plan(items[master_id], aux, injection_metric)
    if master_override is not None:
        plan.rationale["master_override"] = master_override
    return plan
