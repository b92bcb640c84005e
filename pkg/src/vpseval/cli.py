"""Command-line front end.

Commands: vpq, stq, fuse, synth, report. Exit codes are part of the
contract: 0 success, 2 manifest or spec problems, 3 undefined metrics,
4 malformed data.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path
from typing import Optional

from .categories import CategorySet, load_categories
from .codecs import encode_panoptic_video, encode_semantic_video
from .errors import (CapacityError, IntegrityError, LabelError, ManifestError,
                     SchemaError, ShapeError, SpecError, UndefinedMetricError)
from .fusion import FusionConfig
from .metrics import vpq_report
from .report import Report, load_report, render_table, value_entry
from .runner import (RunManifest, discover_manifest, evaluate_stq,
                     evaluate_vpq, run_fusion)
from .synth import CorruptionSpec, SceneSpec, corrupt, generate

DEFAULT_K = (1, 2, 4, 6)

EXIT_OK = 0
EXIT_MANIFEST = 2
EXIT_UNDEFINED = 3
EXIT_DATA = 4


def _parse_k(text: str) -> list[int]:
    try:
        ks = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise SpecError(f"--k expects comma-separated integers, got {text!r}")
    if not ks or any(k < 1 for k in ks):
        raise SpecError(f"--k values must be positive integers, got {text!r}")
    return sorted(set(ks))


def _finish(report: Report, out: Optional[str], started: float,
            jobs: int) -> None:
    report.data["timing"] = {
        "jobs": jobs,
        "wall_seconds": time.perf_counter() - started,
    }
    print(render_table(report.data))
    if out:
        report.save(out)
        print(f"report written to {out}")


def cmd_vpq(args) -> int:
    started = time.perf_counter()
    categories = load_categories(args.categories)
    k_list = _parse_k(args.k)
    manifest = discover_manifest("gt", {"gt": args.gt, "pred": args.pred})
    per_video, merged = evaluate_vpq(manifest, categories, k_list, args.jobs)

    report = Report("vpq", {
        "gt": str(args.gt), "pred": str(args.pred),
        "categories": str(args.categories), "k": k_list,
        "per_video_average": bool(args.per_video_average),
    })
    video_values: dict[str, dict[int, Optional[float]]] = {}
    for vid, accs in per_video.items():
        values = {}
        for k in k_list:
            try:
                values[k] = accs[k].value()
            except UndefinedMetricError:
                values[k] = None
        video_values[vid] = values
        defined = [v for v in values.values() if v is not None]
        report.data["videos"][vid] = {
            "vpq": {str(k): value_entry(values[k]) for k in k_list},
            "mean_vpq": value_entry(
                sum(defined) / len(defined) if len(defined) == len(k_list) else None),
        }

    if args.per_video_average:
        per_k = {}
        for k in k_list:
            defined = [video_values[vid][k] for vid in manifest.video_ids
                       if video_values[vid][k] is not None]
            if not defined:
                raise UndefinedMetricError(f"VPQ^{k} undefined for every video")
            per_k[k] = sum(defined) / len(defined)
        rep = vpq_report(per_k)
    else:
        rep = vpq_report({k: merged[k].value() for k in k_list}, merged)

    report.data["aggregate"] = {
        "vpq": {str(k): value_entry(v) for k, v in rep.per_k.items()},
        "mean_vpq": value_entry(rep.mean_vpq),
        "n_c": {str(k): n for k, n in rep.n_c.items()},
    }
    report.data["tallies"] = {
        "per_video": {vid: {"vpq": {str(k): accs[k].to_dict() for k in k_list}}
                      for vid, accs in per_video.items()},
    }
    _finish(report, args.out, started, args.jobs)
    return EXIT_OK


def cmd_stq(args) -> int:
    started = time.perf_counter()
    categories = load_categories(args.categories)
    manifest = discover_manifest("gt", {"gt": args.gt, "pred": args.pred})
    per_video, merged = evaluate_stq(manifest, categories, args.jobs)

    report = Report("stq", {
        "gt": str(args.gt), "pred": str(args.pred),
        "categories": str(args.categories),
    })
    for vid, acc in per_video.items():
        try:
            rep = acc.report()
            entry = {"sq": value_entry(rep.sq), "aq": value_entry(rep.aq),
                     "stq": value_entry(rep.stq)}
        except UndefinedMetricError:
            entry = {"sq": None, "aq": None, "stq": None}
        report.data["videos"][vid] = entry

    rep = merged.report()
    report.data["aggregate"] = {
        "sq": value_entry(rep.sq),
        "aq": value_entry(rep.aq),
        "stq": value_entry(rep.stq),
    }
    report.data["tallies"] = {
        "per_video": {vid: {"stq": acc.to_dict()}
                      for vid, acc in per_video.items()},
    }
    _finish(report, args.out, started, args.jobs)
    return EXIT_OK


def cmd_fuse(args) -> int:
    started = time.perf_counter()
    categories = load_categories(args.categories)
    manifest = discover_manifest(
        "pred", {"pred": args.pred, "semantic": args.semantic})
    cfg = FusionConfig(
        stuff_vote_threshold=args.stuff_vote_threshold,
        thing_vote_threshold=args.thing_vote_threshold,
        enable_stuff_correction=not args.no_stuff_correction,
        enable_single_thing_correction=not args.no_single_thing,
        enable_void_fill=args.fill_void,
    )
    out_root = Path(args.out)
    audits = run_fusion(manifest, categories, cfg, out_root, args.jobs)

    report = Report("fuse", {
        "pred": str(args.pred), "semantic": str(args.semantic),
        "categories": str(args.categories), "out": str(args.out),
        "stuff_vote_threshold": cfg.stuff_vote_threshold,
        "thing_vote_threshold": cfg.thing_vote_threshold,
        "enable_stuff_correction": cfg.enable_stuff_correction,
        "enable_single_thing_correction": cfg.enable_single_thing_correction,
        "enable_void_fill": cfg.enable_void_fill,
    })
    totals = {"relabeled_stuff": 0, "relabeled_things": 0, "filled_void_pixels": 0}
    for vid in manifest.video_ids:
        audit = audits[vid]
        report.data["videos"][vid] = {"audit": audit}
        for key in totals:
            totals[key] += audit[key]
    report.data["aggregate"] = totals
    _finish(report, str(out_root / "report.json"), started, args.jobs)
    return EXIT_OK


def _load_spec_file(path: str, allowed: dict[str, type]) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read spec file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise SpecError(f"spec file {path} must contain an object")
    unknown = raw.keys() - allowed.keys()
    if unknown:
        raise SpecError(f"spec file {path} has unknown fields {sorted(unknown)}")
    return raw


def _scene_from_file(path: str) -> SceneSpec:
    fields = {"width": int, "height": int, "frames": int, "n_things": int,
              "stuff_layout": list, "motion": list, "seed": int}
    raw = _load_spec_file(path, fields)
    for name in ("width", "height", "frames", "n_things", "stuff_layout"):
        if name not in raw:
            raise SpecError(f"scene spec {path} is missing {name!r}")
    motion = raw.get("motion")
    if motion is not None:
        motion = tuple((int(dx), int(dy)) for dx, dy in motion)
    return SceneSpec(
        width=int(raw["width"]), height=int(raw["height"]),
        frames=int(raw["frames"]), n_things=int(raw["n_things"]),
        stuff_layout=tuple(int(c) for c in raw["stuff_layout"]),
        motion=motion, seed=int(raw.get("seed", 0)))


def _corruption_from_file(path: str) -> CorruptionSpec:
    fields = {"stuff_flip_prob": float, "thing_flip_prob": float,
              "id_swap_frame": int, "erode_radius": int,
              "void_hole_rate": float, "seed": int}
    raw = _load_spec_file(path, fields)
    swap = raw.get("id_swap_frame")
    return CorruptionSpec(
        stuff_flip_prob=float(raw.get("stuff_flip_prob", 0.0)),
        thing_flip_prob=float(raw.get("thing_flip_prob", 0.0)),
        id_swap_frame=None if swap is None else int(swap),
        erode_radius=int(raw.get("erode_radius", 0)),
        void_hole_rate=float(raw.get("void_hole_rate", 0.0)),
        seed=int(raw.get("seed", 0)))


def cmd_synth(args) -> int:
    categories = load_categories(args.categories)
    scene = _scene_from_file(args.scene)
    corruption = _corruption_from_file(args.corrupt) if args.corrupt else None
    if args.count < 1:
        raise SpecError(f"--count must be >= 1, got {args.count}")
    base_seed = args.seed if args.seed is not None else scene.seed
    out_root = Path(args.out)
    for i in range(args.count):
        vid = f"video_{i:04d}"
        scene_i = dataclasses.replace(scene, seed=base_seed + i)
        gt, sem = generate(scene_i, categories)
        pred = gt
        if corruption is not None:
            pred = corrupt(
                gt, dataclasses.replace(corruption, seed=base_seed + i),
                categories)
        encode_panoptic_video(gt, out_root / "gt" / vid)
        encode_panoptic_video(pred, out_root / "pred" / vid)
        encode_semantic_video(sem, out_root / "semantic" / vid)
    print(f"wrote {args.count} video(s) under {out_root}")
    return EXIT_OK


def cmd_report(args) -> int:
    data = load_report(args.report)
    text = render_table(data)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vpseval",
        description="Video panoptic segmentation evaluation and fusion.")
    sub = parser.add_subparsers(dest="command", required=True)

    vpq = sub.add_parser("vpq", help="evaluate VPQ over k-frame windows")
    vpq.add_argument("--gt", required=True, help="ground-truth root directory")
    vpq.add_argument("--pred", required=True, help="prediction root directory")
    vpq.add_argument("--categories", required=True, help="categories file")
    vpq.add_argument("--k", default="1,2,4,6", help="window spans, comma-separated")
    vpq.add_argument("--jobs", type=int, default=1, help="parallel workers")
    vpq.add_argument("--out", help="write the JSON report here")
    vpq.add_argument("--per-video-average", action="store_true",
                     help="average per-video VPQ instead of pooling tallies")
    vpq.set_defaults(func=cmd_vpq)

    stq = sub.add_parser("stq", help="evaluate STQ (SQ, AQ)")
    stq.add_argument("--gt", required=True, help="ground-truth root directory")
    stq.add_argument("--pred", required=True, help="prediction root directory")
    stq.add_argument("--categories", required=True, help="categories file")
    stq.add_argument("--jobs", type=int, default=1, help="parallel workers")
    stq.add_argument("--out", help="write the JSON report here")
    stq.set_defaults(func=cmd_stq)

    fuse_p = sub.add_parser("fuse", help="correct a panoptic tree with semantics")
    fuse_p.add_argument("--pred", required=True, help="panoptic input root")
    fuse_p.add_argument("--semantic", required=True, help="semantic input root")
    fuse_p.add_argument("--categories", required=True, help="categories file")
    fuse_p.add_argument("--out", required=True, help="corrected output root")
    fuse_p.add_argument("--jobs", type=int, default=1, help="parallel workers")
    fuse_p.add_argument("--stuff-vote-threshold", type=float, default=0.5)
    fuse_p.add_argument("--thing-vote-threshold", type=float, default=0.5)
    fuse_p.add_argument("--no-stuff-correction", action="store_true",
                        help="disable stuff relabeling")
    fuse_p.add_argument("--no-single-thing", action="store_true",
                        help="disable lone-thing relabeling")
    fuse_p.add_argument("--fill-void", action="store_true",
                        help="fill void pixels that have stuff semantics")
    fuse_p.set_defaults(func=cmd_fuse)

    synth = sub.add_parser("synth", help="generate synthetic videos")
    synth.add_argument("--scene", required=True, help="scene spec file")
    synth.add_argument("--corrupt", help="corruption spec file for predictions")
    synth.add_argument("--categories", required=True, help="categories file")
    synth.add_argument("--out", required=True, help="output root directory")
    synth.add_argument("--count", type=int, default=1, help="number of videos")
    synth.add_argument("--seed", type=int, default=None,
                       help="base seed; video i uses seed + i")
    synth.set_defaults(func=cmd_synth)

    rep = sub.add_parser("report", help="re-render a saved report")
    rep.add_argument("report", help="path to a report JSON document")
    rep.add_argument("--out", help="also write the rendering here")
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ManifestError, SpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MANIFEST
    except UndefinedMetricError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNDEFINED
    except (SchemaError, IntegrityError, CapacityError, ShapeError,
            LabelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
