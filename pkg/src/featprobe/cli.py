"""Command-line interface: assess, plan, validate, synth, sweep.

Every subcommand reads manifests or JSON documents, writes one JSON
report, and exits 0. Usage problems exit 1; data or metric problems
exit 2 with a structured {"error": {code, message}} envelope on stderr.
Reports are byte-identical across runs and thread counts once the
timestamp is suppressed, so they can be diffed and checked in.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .ef_metrics import EFParams, ef
from .errors import BadSpec, FeatProbeError, NoValidSegments
from .fusion_planner import StrideProfile, plan_from_profiles
from .image_ops import ScalarMap
from .sc_metrics import SCParams, sc
from .sensitivity import SweepSpec, run_sweep
from .synth_bench import SynthSpec, generate, make_encoder_pair, make_scene
from .tensor_store import (
    FEATURE_STRIDES,
    EncoderFeatureSet,
    FeatureTensor,
    load_manifest,
    save_feature_set,
    write_feature_tensor,
    write_label_map,
    write_pgm,
)
from .validation import OutcomePair, correlate_profiles, sc_gt

DEFAULT_THREADS = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="featprobe", description=__doc__)
    parser.add_argument("--version", action="version", version=f"featprobe {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common_out(p):
        p.add_argument("--out", required=True, help="output JSON path")
        p.add_argument("--pretty", action="store_true", help="indent the output JSON")
        p.add_argument(
            "--no-timestamp", action="store_true", help="omit the timestamp field"
        )

    def add_metric_flags(p):
        p.add_argument("--grid-k", type=int, default=None)
        p.add_argument("--pca-dims", type=int, default=None)
        p.add_argument("--k-set", type=str, default=None, help="comma-separated, e.g. 6,8,10")
        p.add_argument("--sample-cap", type=int, default=None)
        p.add_argument("--r-in", type=float, default=None)
        p.add_argument("--r-out", type=float, default=None)
        p.add_argument("--rho-low", type=float, default=None)
        p.add_argument("--tau", type=float, default=None)
        p.add_argument("--gamma", type=float, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--radii-cap", type=float, default=None, help="radii cap fraction")
        p.add_argument("--seed", type=int, default=None, help="default: env FEATURE_PROBE_SEED or 0")

    p_assess = sub.add_parser("assess", help="profile encoders from manifests")
    p_assess.add_argument("--manifest", action="append", required=True)
    p_assess.add_argument("--threads", type=int, default=DEFAULT_THREADS)
    add_metric_flags(p_assess)
    add_common_out(p_assess)

    p_plan = sub.add_parser("plan", help="derive a fusion plan from profiles")
    p_plan.add_argument("--report", help="assessment report JSON")
    p_plan.add_argument("--profile", action="append", help="StrideProfile JSON (repeatable)")
    p_plan.add_argument("--master", default=None, help="override master encoder id")
    p_plan.add_argument(
        "--injection-metric", choices=("ef", "sc"), default="ef",
        help="metric whose argmax picks the injection stride",
    )
    add_common_out(p_plan)

    p_validate = sub.add_parser("validate", help="check metrics against ground truth")
    p_validate.add_argument("--manifest", action="append", default=None)
    p_validate.add_argument("--pairs", default=None, help="outcome-pairs JSON path")
    add_metric_flags(p_validate)
    add_common_out(p_validate)

    p_synth = sub.add_parser("synth", help="write synthetic fixtures")
    p_synth.add_argument("--spec", required=True, help="synth spec JSON path")
    p_synth.add_argument("--out-dir", required=True)

    p_sweep = sub.add_parser("sweep", help="one-parameter sensitivity sweep")
    p_sweep.add_argument("--manifest", action="append", required=True)
    p_sweep.add_argument("--parameter", required=True)
    p_sweep.add_argument("--grid", default=None, help="comma-separated values")
    p_sweep.add_argument(
        "--assert-sc-order", action="append", default=[],
        metavar="HIGHER,LOWER", help="assert mean SC of HIGHER > LOWER at every point",
    )
    p_sweep.add_argument(
        "--assert-ef-argmax", action="append", default=[],
        metavar="ENCODER,STRIDE", help="assert the EF argmax stride at every point",
    )
    add_metric_flags(p_sweep)
    add_common_out(p_sweep)

    return parser


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("FEATURE_PROBE_SEED", "").strip()
    if env:
        try:
            return int(env)
        except ValueError as err:
            raise UsageError(f"FEATURE_PROBE_SEED must be an integer, got {env!r}") from err
    return 0


def _params_from_args(args) -> tuple[SCParams, EFParams]:
    seed = _resolve_seed(args)
    sc_kwargs = {"seed": seed}
    if args.grid_k is not None:
        sc_kwargs["grid_k"] = args.grid_k
    if args.pca_dims is not None:
        sc_kwargs["pca_dims"] = args.pca_dims
    if args.k_set is not None:
        try:
            sc_kwargs["k_set"] = tuple(int(tok) for tok in args.k_set.split(",") if tok)
        except ValueError as err:
            raise UsageError(f"bad --k-set value {args.k_set!r}") from err
    if args.sample_cap is not None:
        sc_kwargs["sample_cap"] = args.sample_cap
    ef_kwargs = {"seed": seed}
    for name, attr in (
        ("r_in", "r_in"), ("r_out", "r_out"), ("rho_low", "rho_low"),
        ("tau", "tau"), ("gamma", "gamma"), ("alpha", "alpha"),
    ):
        value = getattr(args, attr)
        if value is not None:
            ef_kwargs[name] = value
    if args.radii_cap is not None:
        ef_kwargs["radii_cap_fraction"] = args.radii_cap
    try:
        return SCParams(**sc_kwargs), EFParams(**ef_kwargs)
    except ValueError as err:
        raise UsageError(str(err)) from err


def _timestamp(args) -> dict:
    if args.no_timestamp:
        return {}
    return {"timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds")}


def _write_report(doc: dict, args) -> None:
    text = json.dumps(doc, indent=2 if args.pretty else None, sort_keys=True) + "\n"
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)


def _eval_stage(fs: EncoderFeatureSet, stride: int, scp: SCParams, efp: EFParams) -> dict:
    tensor = fs.tensors[stride]
    try:
        sc_res = sc(tensor, scp)
        ef_res = ef(tensor, fs.image, efp)
    except FeatProbeError as err:
        err.args = (f"{fs.encoder_id} stride {stride}: {err}",)
        raise
    return {
        "sfc": sc_res.sfc,
        "scs": sc_res.scs,
        "sc": sc_res.sc,
        "ec": ef_res.ec,
        "nc": ef_res.nc,
        "fc": ef_res.fc,
        "sp": ef_res.sp,
        "ef": ef_res.ef,
        "r_tau_px": ef_res.r_tau_px,
        "flags": sorted(set(sc_res.flags) | set(ef_res.flags)),
    }


NUMERIC_ROW_FIELDS = ("sfc", "scs", "sc", "ec", "nc", "fc", "sp", "ef", "r_tau_px")


def _aggregate_rows(per_image_rows: list[dict[int, dict]]) -> dict[int, dict]:
    """Mean of numeric fields and union of flags across images."""
    out: dict[int, dict] = {}
    for s in FEATURE_STRIDES:
        rows = [r[s] for r in per_image_rows]
        merged = {
            name: float(np.mean([row[name] for row in rows])) for name in NUMERIC_ROW_FIELDS
        }
        merged["flags"] = sorted(set().union(*(row["flags"] for row in rows)))
        out[s] = merged
    return out


def cmd_assess(args) -> int:
    scp, efp = _params_from_args(args)
    threads = max(1, args.threads)
    sets = [(path, load_manifest(path)) for path in args.manifest]

    tasks = [(i, stride) for i in range(len(sets)) for stride in FEATURE_STRIDES]
    results: dict[tuple[int, int], dict] = {}
    if threads == 1:
        for i, stride in tasks:
            results[(i, stride)] = _eval_stage(sets[i][1], stride, scp, efp)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {
                key: pool.submit(_eval_stage, sets[key[0]][1], key[1], scp, efp)
                for key in tasks
            }
            # Collect in task order so the first failure is deterministic.
            for key in tasks:
                results[key] = futures[key].result()

    images = []
    by_encoder: dict[str, list[dict[int, dict]]] = {}
    for i, (path, fs) in enumerate(sets):
        rows = {stride: results[(i, stride)] for stride in FEATURE_STRIDES}
        images.append(
            {
                "manifest": str(path),
                "encoder_id": fs.encoder_id,
                "rows": {str(s): rows[s] for s in FEATURE_STRIDES},
            }
        )
        by_encoder.setdefault(fs.encoder_id, []).append(rows)

    params_echo = {"sc": scp.to_dict(), "ef": efp.to_dict()}
    encoders = []
    for encoder_id in sorted(by_encoder):
        profile = StrideProfile(
            encoder_id, _aggregate_rows(by_encoder[encoder_id]), params_echo
        )
        encoders.append(profile.to_dict())

    doc = {
        "version": __version__,
        "params": params_echo,
        "encoders": encoders,
        "images": images,
        **_timestamp(args),
    }
    _write_report(doc, args)
    return 0


def cmd_plan(args) -> int:
    profiles: list[StrideProfile] = []
    if args.report:
        report = _load_json(args.report)
        if not isinstance(report, dict) or "encoders" not in report:
            raise BadSpec(f"{args.report}: not an assessment report (no encoders)")
        profiles.extend(StrideProfile.from_dict(doc) for doc in report["encoders"])
    for path in args.profile or []:
        doc = _load_json(path)
        if isinstance(doc, dict) and "encoders" in doc:
            profiles.extend(StrideProfile.from_dict(e) for e in doc["encoders"])
        else:
            profiles.append(StrideProfile.from_dict(doc))
    if not args.report and not args.profile:
        raise UsageError("plan needs --report or --profile")

    plan = plan_from_profiles(profiles, args.master, args.injection_metric)
    doc = {"version": __version__, **plan.to_dict(), **_timestamp(args)}
    _write_report(doc, args)
    return 0


def cmd_validate(args) -> int:
    scp, _ = _params_from_args(args)
    if not args.manifest and not args.pairs:
        raise UsageError("validate needs --manifest and/or --pairs")

    doc: dict = {"version": __version__}
    if args.manifest:
        rows = []
        sc_values = []
        gt_values = []
        for path in args.manifest:
            fs = load_manifest(path)
            if fs.label_map is None:
                raise NoValidSegments(f"{path}: manifest has no label_map")
            for stride, tensor in fs.stages():
                sc_value = sc(tensor, scp).sc
                gt_value = sc_gt(tensor, fs.label_map)
                sc_values.append(sc_value)
                gt_values.append(gt_value)
                rows.append(
                    {
                        "manifest": str(path),
                        "encoder_id": fs.encoder_id,
                        "stride": stride,
                        "sc": sc_value,
                        "sc_gt": gt_value,
                    }
                )
        doc["sc_gt_rows"] = rows
        pairs = [
            OutcomePair(f"{r['encoder_id']}:{r['stride']}:{i}", r["sc"], r["sc_gt"])
            for i, r in enumerate(rows)
        ]
        doc["sc_gt_spearman"] = correlate_profiles(pairs).to_dict()

    if args.pairs:
        raw = _load_json(args.pairs)
        if not isinstance(raw, list):
            raise BadSpec(f"{args.pairs}: expected a JSON list of pairs")
        pairs = []
        for i, item in enumerate(raw):
            if not isinstance(item, dict) or "metric_value" not in item or "outcome_value" not in item:
                raise BadSpec(f"{args.pairs}: pair {i} needs metric_value and outcome_value")
            pairs.append(
                OutcomePair(
                    str(item.get("key", i)),
                    float(item["metric_value"]),
                    float(item["outcome_value"]),
                )
            )
        doc["pairs_spearman"] = correlate_profiles(pairs).to_dict()

    doc.update(_timestamp(args))
    _write_report(doc, args)
    return 0


def _load_json(path: str):
    p = Path(path)
    if not p.is_file():
        raise BadSpec(f"{path}: no such file")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as err:
        raise BadSpec(f"{path}: invalid JSON ({err})") from err


def cmd_synth(args) -> int:
    spec_doc = _load_json(args.spec)
    if isinstance(spec_doc, dict) and "items" in spec_doc:
        items = spec_doc["items"]
    elif isinstance(spec_doc, list):
        items = spec_doc
    else:
        items = [spec_doc]

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            raise BadSpec(f"synth item {i} must be an object")
        name = item.get("name", f"item_{i:02d}")
        kind = item.get("kind")
        if kind == "scene":
            image, labels = make_scene(
                int(item.get("seed", 0)), int(item.get("size", 640)),
                int(item.get("n_rects", 5)), int(item.get("n_discs", 3)),
            )
            write_pgm(image, out_dir / f"{name}.pgm")
            write_label_map(labels, out_dir / f"{name}_labels.ften")
            written += [f"{name}.pgm", f"{name}_labels.ften"]
        elif kind == "encoder_pair":
            structure, edge = make_encoder_pair(
                int(item.get("seed", 0)), int(item.get("size", 640)),
                int(item.get("channels", 16)),
            )
            for fs in (structure, edge):
                manifest = save_feature_set(fs, out_dir / f"{name}_{fs.encoder_id}")
                written.append(str(manifest.relative_to(out_dir)))
        else:
            made = generate(SynthSpec.from_dict(item))
            path = out_dir / f"{name}.ften"
            if isinstance(made, ScalarMap):
                write_feature_tensor(FeatureTensor(made.values[None], 1), path)
            else:
                write_feature_tensor(made, path)
            written.append(f"{name}.ften")

    listing = {"out_dir": str(out_dir), "written": written}
    print(json.dumps(listing, sort_keys=True))
    return 0


def cmd_sweep(args) -> int:
    scp, efp = _params_from_args(args)
    grid: tuple = ()
    if args.grid:
        tokens = [tok for tok in args.grid.split(",") if tok]
        if not tokens:
            raise UsageError(f"empty --grid {args.grid!r}")
        if args.parameter == "k_set":
            grid = tuple((int(tok),) for tok in tokens)
        elif args.parameter in ("grid_k", "pca_dims", "sample_cap"):
            grid = tuple(int(tok) for tok in tokens)
        else:
            grid = tuple(float(tok) for tok in tokens)

    assertions: list[dict] = []
    for raw in args.assert_sc_order:
        parts = raw.split(",")
        if len(parts) != 2:
            raise UsageError(f"--assert-sc-order expects HIGHER,LOWER, got {raw!r}")
        assertions.append({"kind": "mean_sc_order", "higher": parts[0], "lower": parts[1]})
    for raw in args.assert_ef_argmax:
        parts = raw.split(",")
        if len(parts) != 2:
            raise UsageError(f"--assert-ef-argmax expects ENCODER,STRIDE, got {raw!r}")
        try:
            stride = int(parts[1])
        except ValueError as err:
            raise UsageError(f"bad stride in {raw!r}") from err
        assertions.append({"kind": "ef_argmax", "encoder": parts[0], "stride": stride})

    try:
        spec = SweepSpec(args.parameter, grid, tuple(assertions), scp, efp)
    except BadSpec as err:
        raise UsageError(str(err)) from err
    sets = [load_manifest(path) for path in args.manifest]
    report = run_sweep(spec, sets)
    doc = {"version": __version__, **report, **_timestamp(args)}
    _write_report(doc, args)
    return 0


_COMMANDS = {
    "assess": cmd_assess,
    "plan": cmd_plan,
    "validate": cmd_validate,
    "synth": cmd_synth,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as err:
        _emit_error("UsageError", str(err))
        return 1
    except FeatProbeError as err:
        _emit_error(err.code, str(err))
        return 2


def _emit_error(code: str, message: str) -> None:
    print(json.dumps({"error": {"code": code, "message": message}}), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
