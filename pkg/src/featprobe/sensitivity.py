"""One-at-a-time parameter sweeps with ordering assertions.

The point of a sweep is not the metric values themselves but whether
the qualitative conclusions survive: which encoder has higher mean
structural coherence, and at which stride edge fidelity peaks. Each
sweep varies a single parameter over a grid while everything else stays
at its base value, and re-checks the declared assertions at every grid
point. Only the affected metric family is recomputed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable

from .ef_metrics import EFParams
from .errors import BadSpec
from .fusion_planner import (
    StrideProfile,
    compute_ef_rows,
    compute_sc_rows,
    merge_rows,
    select_injection_stride,
)
from .sc_metrics import SCParams
from .tensor_store import EncoderFeatureSet

SC_FIELDS = ("grid_k", "pca_dims", "k_set", "sample_cap")
EF_FIELDS = ("r_in", "r_out", "rho_low", "tau", "gamma", "alpha", "radii_cap_fraction")

DEFAULT_GRIDS: dict[str, list] = {
    "grid_k": [8, 12, 16, 20],
    "pca_dims": [16, 32, 64],
    "k_set": [(4,), (6,), (8,), (10,), (12,)],
    "r_in": [2.0, 3.0, 4.0],
    "r_out": [6.0, 7.0, 8.0],
    "rho_low": [0.10, 0.15, 0.20],
    "tau": [0.4, 0.5, 0.6],
}


@dataclass(frozen=True)
class SweepSpec:
    """One parameter, its grid, and the assertions to re-check."""

    parameter: str
    grid: tuple = ()
    assertions: tuple[dict, ...] = ()
    base_sc: SCParams = field(default_factory=SCParams)
    base_ef: EFParams = field(default_factory=EFParams)

    def __post_init__(self):
        if self.parameter not in SC_FIELDS + EF_FIELDS:
            raise BadSpec(
                f"unknown sweep parameter {self.parameter!r}; "
                f"expected one of {SC_FIELDS + EF_FIELDS}"
            )
        grid = tuple(self.grid) if self.grid else tuple(DEFAULT_GRIDS.get(self.parameter, ()))
        if not grid:
            raise BadSpec(f"empty grid for parameter {self.parameter!r}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "assertions", tuple(self.assertions))
        for a in self.assertions:
            if a.get("kind") not in ("mean_sc_order", "ef_argmax"):
                raise BadSpec(f"unknown assertion kind {a.get('kind')!r}")


def _check_assertion(a: dict, profiles: dict[str, StrideProfile]) -> bool:
    if a["kind"] == "mean_sc_order":
        return profiles[a["higher"]].mean_sc() > profiles[a["lower"]].mean_sc()
    stride = select_injection_stride(profiles[a["encoder"]], a.get("metric", "ef"))
    return stride == int(a["stride"])


def run_sweep(spec: SweepSpec, sets: Iterable[EncoderFeatureSet]) -> dict:
    """Evaluate every grid point and report whether assertions hold.

    Returns a JSON-ready document with per-point profiles and assertion
    outcomes plus an overall all_hold verdict.
    """
    pool = list(sets)
    if not pool:
        raise BadSpec("sweep needs at least one feature set")
    names = [fs.encoder_id for fs in pool]
    if len(set(names)) != len(names):
        raise BadSpec("feature sets must have distinct encoder ids")
    for a in spec.assertions:
        for key in ("higher", "lower", "encoder"):
            if key in a and a[key] not in names:
                raise BadSpec(f"assertion references unknown encoder {a[key]!r}")

    sc_side = spec.parameter in SC_FIELDS
    # The untouched family is constant across the grid; compute it once.
    if sc_side:
        fixed = {fs.encoder_id: compute_ef_rows(fs, spec.base_ef) for fs in pool}
    else:
        fixed = {fs.encoder_id: compute_sc_rows(fs, spec.base_sc) for fs in pool}

    points = []
    all_hold = True
    for value in spec.grid:
        if sc_side:
            params = replace(spec.base_sc, **{spec.parameter: value})
            profiles = {
                fs.encoder_id: StrideProfile(
                    fs.encoder_id,
                    merge_rows(compute_sc_rows(fs, params), fixed[fs.encoder_id]),
                    {"sc": params.to_dict(), "ef": spec.base_ef.to_dict()},
                )
                for fs in pool
            }
        else:
            params = replace(spec.base_ef, **{spec.parameter: value})
            profiles = {
                fs.encoder_id: StrideProfile(
                    fs.encoder_id,
                    merge_rows(fixed[fs.encoder_id], compute_ef_rows(fs, params)),
                    {"sc": spec.base_sc.to_dict(), "ef": params.to_dict()},
                )
                for fs in pool
            }
        outcomes = []
        for a in spec.assertions:
            holds = _check_assertion(a, profiles)
            all_hold &= holds
            outcomes.append({**a, "holds": holds})
        points.append(
            {
                "value": list(value) if isinstance(value, tuple) else value,
                "assertions": outcomes,
                "profiles": {name: p.to_dict() for name, p in profiles.items()},
            }
        )

    return {
        "parameter": spec.parameter,
        "grid": [list(v) if isinstance(v, tuple) else v for v in spec.grid],
        "points": points,
        "all_hold": bool(all_hold),
    }
