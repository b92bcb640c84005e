"""Dataset discovery and parallel per-video evaluation.

Videos are independent, so workers each own one video and return plain
accumulator dicts; the parent merges them in ascending video-id order.
That merge order is fixed regardless of job count, which is what makes
reports byte-identical between --jobs 1 and --jobs 8.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .categories import CategorySet
from .codecs import (decode_panoptic_video, decode_semantic_video,
                     encode_panoptic_video)
from .errors import ManifestError
from .fusion import FusionConfig, fuse
from .metrics import (MetricAccumulator, StqAccumulator, accumulate_stq,
                      match_window, vpq_for_k)
from .tubes import PairCounts, WindowSpec, extract_overlaps


@dataclass(frozen=True)
class RunManifest:
    """Resolved dataset layout: one subdirectory per video under each role."""

    video_ids: tuple[str, ...]
    roots: dict[str, Path]  # role name -> root directory

    def video_dir(self, role: str, video_id: str) -> Path:
        return self.roots[role] / video_id


def discover_manifest(primary_role: str, roots: dict[str, Path]) -> RunManifest:
    """List video ids under the primary root and check every role has them."""
    roots = {role: Path(root) for role, root in roots.items()}
    primary = roots[primary_role]
    if not primary.is_dir():
        raise ManifestError(f"{primary_role} root {primary} is not a directory")
    video_ids = tuple(sorted(d.name for d in primary.iterdir() if d.is_dir()))
    if not video_ids:
        raise ManifestError(f"no video directories under {primary}")
    for role, root in roots.items():
        if not root.is_dir():
            raise ManifestError(f"{role} root {root} is not a directory")
        for vid in video_ids:
            if not (root / vid).is_dir():
                raise ManifestError(f"video {vid} missing under {role} root {root}")
    return RunManifest(video_ids, roots)


def _run_ordered(fn, tasks: list, jobs: int) -> list:
    if jobs <= 1:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, tasks))


def _eval_vpq_video(task) -> tuple[str, dict[int, dict]]:
    vid, gt_dir, pred_dir, categories, k_list = task
    gt = decode_panoptic_video(gt_dir, categories)
    pred = decode_panoptic_video(pred_dir, categories)
    counts = PairCounts(pred.segment_maps, gt.segment_maps)
    out: dict[int, dict] = {}
    for k in k_list:
        acc = MetricAccumulator(k)
        for table in extract_overlaps(pred, gt, WindowSpec(k), vid, counts):
            acc.add_window(match_window(table))
        out[k] = acc.to_dict()
    return vid, out


def evaluate_vpq(manifest: RunManifest, categories: CategorySet,
                 k_list: Iterable[int], jobs: int
                 ) -> tuple[dict[str, dict[int, MetricAccumulator]],
                            dict[int, MetricAccumulator]]:
    """Per-video accumulators plus their deterministic merge, per span."""
    k_list = list(k_list)
    tasks = [(vid, manifest.video_dir("gt", vid), manifest.video_dir("pred", vid),
              categories, k_list) for vid in manifest.video_ids]
    results = _run_ordered(_eval_vpq_video, tasks, jobs)
    per_video: dict[str, dict[int, MetricAccumulator]] = {}
    merged = {k: MetricAccumulator(k) for k in k_list}
    for vid, accs in results:
        per_video[vid] = {k: MetricAccumulator.from_dict(accs[k]) for k in k_list}
        for k in k_list:
            merged[k].merge(per_video[vid][k])
    return per_video, merged


def _eval_stq_video(task) -> tuple[str, dict]:
    vid, gt_dir, pred_dir, categories = task
    gt = decode_panoptic_video(gt_dir, categories)
    pred = decode_panoptic_video(pred_dir, categories)
    return vid, accumulate_stq(pred, gt, categories).to_dict()


def evaluate_stq(manifest: RunManifest, categories: CategorySet, jobs: int
                 ) -> tuple[dict[str, StqAccumulator], StqAccumulator]:
    tasks = [(vid, manifest.video_dir("gt", vid), manifest.video_dir("pred", vid),
              categories) for vid in manifest.video_ids]
    results = _run_ordered(_eval_stq_video, tasks, jobs)
    per_video: dict[str, StqAccumulator] = {}
    merged = StqAccumulator()
    for vid, acc in results:
        per_video[vid] = StqAccumulator.from_dict(acc)
        merged.merge(per_video[vid])
    return per_video, merged


def _fuse_video(task) -> tuple[str, dict]:
    vid, pred_dir, sem_dir, out_dir, categories, cfg = task
    pan = decode_panoptic_video(pred_dir, categories)
    sem = decode_semantic_video(sem_dir, categories)
    fused, audit = fuse(pan, sem, cfg, categories)
    encode_panoptic_video(fused, out_dir)
    return vid, audit.to_dict()


def run_fusion(manifest: RunManifest, categories: CategorySet, cfg: FusionConfig,
               out_root: Path, jobs: int) -> dict[str, dict]:
    """Fuse every video into out_root/<video id>/ and return the audits."""
    tasks = [(vid, manifest.video_dir("pred", vid),
              manifest.video_dir("semantic", vid), Path(out_root) / vid,
              categories, cfg) for vid in manifest.video_ids]
    results = _run_ordered(_fuse_video, tasks, jobs)
    return dict(results)
