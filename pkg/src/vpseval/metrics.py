"""VPQ, PQ, and STQ from overlap tables, with mergeable accumulators.

VPQ^k per category is sum-of-matched-IoU / (TP + FP/2 + FN/2), pooled over
every window of every video, then averaged over the categories that appear
at all. Matching follows the PQ rule: same category, tube IoU strictly
above 0.5, which makes the match one-to-one automatically. STQ is the
geometric mean of a semantic quality (per-category pixel IoU, instance
identity ignored) and an association quality over full-video thing tracks.

Accumulators merge by field-wise addition so per-video work can run in
parallel and be reduced deterministically afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Optional

import numpy as np

from .categories import CategorySet
from .errors import LabelError, ShapeError, UndefinedMetricError
from .tubes import (OverlapTable, PairCounts, SegmentTube, WindowSpec,
                    extract_overlaps, tube_iou)
from .video import PanopticFrame, PanopticVideo

MATCH_IOU = 0.5  # strict: a pair matches only when IoU > this


def _category_maps(video: PanopticVideo) -> np.ndarray:
    """Pixel-wise category ids of a panoptic video, void mapped to 0."""
    max_sid = int(video.segment_maps.max(initial=0))
    lut = np.zeros(max_sid + 1, dtype=np.int64)
    for sid, seg in video.segments.items():
        if sid <= max_sid:
            lut[sid] = seg.category_id
    return lut[video.segment_maps]


@dataclass
class CategoryTally:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    iou_sum: float = 0.0

    def __iadd__(self, other: "CategoryTally") -> "CategoryTally":
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn
        self.iou_sum += other.iou_sum
        return self

    @property
    def active(self) -> bool:
        return self.tp + self.fp + self.fn > 0

    def value(self) -> float:
        return self.iou_sum / (self.tp + 0.5 * self.fp + 0.5 * self.fn)


class WindowMatches(NamedTuple):
    matches: list[tuple[SegmentTube, SegmentTube, float]]
    unmatched_pred: list[SegmentTube]  # FP, void-dominated tubes removed
    unmatched_gt: list[SegmentTube]  # FN


def match_window(table: OverlapTable) -> WindowMatches:
    """PQ-style matching of one window's tubes.

    A pred tube whose overlap with gt void exceeds half its area is
    dropped from the FP list entirely.
    """
    pred_by_sid = {t.key.segment_id: t for t in table.pred_tubes}
    gt_by_sid = {t.key.segment_id: t for t in table.gt_tubes}
    matched_p: set[int] = set()
    matched_g: set[int] = set()
    matches = []
    for (psid, gsid), inter in sorted(table.intersections.items()):
        p = pred_by_sid[psid]
        g = gt_by_sid[gsid]
        if p.key.category_id != g.key.category_id:
            continue
        iou = tube_iou(p, g, inter)
        if iou > MATCH_IOU:
            matches.append((p, g, iou))
            matched_p.add(psid)
            matched_g.add(gsid)
    unmatched_pred = [
        t for t in table.pred_tubes
        if t.key.segment_id not in matched_p
        and table.gt_void_overlap.get(t.key.segment_id, 0) <= 0.5 * t.area
    ]
    unmatched_gt = [t for t in table.gt_tubes if t.key.segment_id not in matched_g]
    return WindowMatches(matches, unmatched_pred, unmatched_gt)


class MetricAccumulator:
    """Per-category TP/FP/FN/IoU-sum tallies for one window span."""

    def __init__(self, span_k: int,
                 per_category: Optional[dict[int, CategoryTally]] = None):
        self.span_k = span_k
        self.per_category: dict[int, CategoryTally] = per_category or {}

    def _tally(self, category_id: int) -> CategoryTally:
        tally = self.per_category.get(category_id)
        if tally is None:
            tally = self.per_category[category_id] = CategoryTally()
        return tally

    def add_window(self, matched: WindowMatches) -> None:
        for p, _g, iou in matched.matches:
            tally = self._tally(p.key.category_id)
            tally.tp += 1
            tally.iou_sum += iou
        for t in matched.unmatched_pred:
            self._tally(t.key.category_id).fp += 1
        for t in matched.unmatched_gt:
            self._tally(t.key.category_id).fn += 1

    def merge(self, other: "MetricAccumulator") -> "MetricAccumulator":
        if self.span_k != other.span_k:
            raise LabelError(
                f"cannot merge span {self.span_k} with span {other.span_k}")
        for cat, tally in sorted(other.per_category.items()):
            self._tally(cat).__iadd__(tally)
        return self

    def active_categories(self) -> list[int]:
        return sorted(c for c, t in self.per_category.items() if t.active)

    def value(self) -> float:
        """Mean per-category quality over categories that appear at all."""
        cats = self.active_categories()
        if not cats:
            raise UndefinedMetricError(
                f"no categories present in any window of span {self.span_k}")
        return sum(self.per_category[c].value() for c in cats) / len(cats)

    def per_category_values(self) -> dict[int, float]:
        return {c: self.per_category[c].value() for c in self.active_categories()}

    def to_dict(self) -> dict:
        return {
            "span_k": self.span_k,
            "per_category": {
                str(c): {"tp": t.tp, "fp": t.fp, "fn": t.fn, "iou_sum": t.iou_sum}
                for c, t in sorted(self.per_category.items())
            },
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "MetricAccumulator":
        per_category = {
            int(c): CategoryTally(t["tp"], t["fp"], t["fn"], t["iou_sum"])
            for c, t in data["per_category"].items()
        }
        return cls(int(data["span_k"]), per_category)


def merge_accumulators(a: Mapping[int, MetricAccumulator],
                       b: Mapping[int, MetricAccumulator]
                       ) -> dict[int, MetricAccumulator]:
    """Merge two span-keyed accumulator sets field-wise."""
    out: dict[int, MetricAccumulator] = {}
    for k in sorted(set(a) | set(b)):
        acc = MetricAccumulator(k)
        if k in a:
            acc.merge(a[k])
        if k in b:
            acc.merge(b[k])
        out[k] = acc
    return out


def vpq_for_k(tables: Iterable[OverlapTable],
              categories: CategorySet) -> tuple[MetricAccumulator, float]:
    """Accumulate every window of one span and return (tallies, VPQ^k)."""
    acc: Optional[MetricAccumulator] = None
    for table in tables:
        if acc is None:
            acc = MetricAccumulator(table.span_k)
        elif acc.span_k != table.span_k:
            raise LabelError(
                f"mixed spans in one evaluation: {acc.span_k} and {table.span_k}")
        acc.add_window(match_window(table))
    if acc is None:
        raise UndefinedMetricError("no windows to evaluate")
    return acc, acc.value()


@dataclass(frozen=True)
class VpqReport:
    per_k: dict[int, float]
    mean_vpq: float
    per_category: dict[int, dict[int, float]] = field(default_factory=dict)
    n_c: dict[int, int] = field(default_factory=dict)


def vpq_report(per_k: Mapping[int, float],
               accumulators: Optional[Mapping[int, MetricAccumulator]] = None
               ) -> VpqReport:
    """Combine per-span values; the headline number is their plain mean."""
    if not per_k:
        raise UndefinedMetricError("no spans evaluated")
    per_k = {int(k): float(v) for k, v in sorted(per_k.items())}
    mean_vpq = sum(per_k.values()) / len(per_k)
    per_category: dict[int, dict[int, float]] = {}
    n_c: dict[int, int] = {}
    if accumulators:
        for k, acc in sorted(accumulators.items()):
            per_category[k] = acc.per_category_values()
            n_c[k] = len(per_category[k])
    return VpqReport(per_k, mean_vpq, per_category, n_c)


def pq_image(pred: PanopticFrame, gt: PanopticFrame,
             categories: CategorySet) -> tuple[MetricAccumulator, float]:
    """Single-frame PQ: the span-1 metric on a one-frame video."""
    tables = extract_overlaps(pred.as_video(), gt.as_video(), WindowSpec(1))
    return vpq_for_k(tables, categories)


@dataclass
class StqAccumulator:
    """Pooled SQ confusion marginals and AQ track sums."""

    sem_intersection: dict[int, int] = field(default_factory=dict)
    sem_union: dict[int, int] = field(default_factory=dict)
    aq_sum: float = 0.0
    track_count: int = 0

    def merge(self, other: "StqAccumulator") -> "StqAccumulator":
        for c, v in sorted(other.sem_intersection.items()):
            self.sem_intersection[c] = self.sem_intersection.get(c, 0) + v
        for c, v in sorted(other.sem_union.items()):
            self.sem_union[c] = self.sem_union.get(c, 0) + v
        self.aq_sum += other.aq_sum
        self.track_count += other.track_count
        return self

    def report(self, missing_tracks_ok: bool = False) -> "StqReport":
        cats = sorted(c for c, u in self.sem_union.items() if u > 0)
        if not cats:
            raise UndefinedMetricError("no semantic categories present")
        sq = sum(self.sem_intersection.get(c, 0) / self.sem_union[c]
                 for c in cats) / len(cats)
        if self.track_count == 0:
            if not missing_tracks_ok:
                raise UndefinedMetricError("no ground-truth thing tracks")
            aq = 1.0
        else:
            aq = self.aq_sum / self.track_count
        return StqReport(sq, aq, math.sqrt(sq * aq))

    def to_dict(self) -> dict:
        return {
            "sem_intersection": {str(c): v for c, v in
                                 sorted(self.sem_intersection.items())},
            "sem_union": {str(c): v for c, v in sorted(self.sem_union.items())},
            "aq_sum": self.aq_sum,
            "track_count": self.track_count,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "StqAccumulator":
        return cls(
            {int(c): int(v) for c, v in data["sem_intersection"].items()},
            {int(c): int(v) for c, v in data["sem_union"].items()},
            float(data["aq_sum"]),
            int(data["track_count"]),
        )


@dataclass(frozen=True)
class StqReport:
    sq: float
    aq: float
    stq: float


def accumulate_stq(pred: PanopticVideo, gt: PanopticVideo,
                   categories: CategorySet) -> StqAccumulator:
    """One video's STQ sufficient statistics.

    SQ side: confusion of semantically collapsed maps; gt-void pixels are
    excluded from every denominator. AQ side: full-video thing tracks
    matched category-agnostically, each gt track contributing its
    IoU-weighted overlap mass normalized by its own area.
    """
    if pred.segment_maps.shape != gt.segment_maps.shape:
        raise ShapeError(
            f"pred {pred.segment_maps.shape} and gt {gt.segment_maps.shape} differ")
    acc = StqAccumulator()

    # Confusion of category maps with void collapsed to 0 (never a valid
    # category id), so the kernel's pinned index 0 is the void marginal.
    conf = PairCounts(_category_maps(pred), _category_maps(gt))
    cw = conf.window(0, pred.num_frames)
    pred_marginal = cw.sum(axis=1)
    gt_marginal = cw.sum(axis=0)
    for cat in (c.id for c in categories):
        ri = conf.a_index(cat)
        ci = conf.b_index(cat)
        inter = int(cw[ri, ci]) if ri is not None and ci is not None else 0
        pred_on_labeled = int(pred_marginal[ri] - cw[ri, 0]) if ri is not None else 0
        gt_count = int(gt_marginal[ci]) if ci is not None else 0
        union = pred_on_labeled + gt_count - inter
        if union > 0:
            acc.sem_intersection[cat] = inter
            acc.sem_union[cat] = union

    counts = PairCounts(pred.segment_maps, gt.segment_maps)
    w = counts.window(0, pred.num_frames)
    pred_areas = w.sum(axis=1)
    gt_areas = w.sum(axis=0)
    pred_thing = [i for i, sid in enumerate(counts.a_ids)
                  if sid != 0 and pred_areas[i] > 0
                  and categories.is_thing(pred.segments[int(sid)].category_id)]
    gt_thing = [j for j, sid in enumerate(counts.b_ids)
                if sid != 0 and gt_areas[j] > 0
                and categories.is_thing(gt.segments[int(sid)].category_id)]
    for j in gt_thing:
        g_area = int(gt_areas[j])
        score = 0.0
        for i in pred_thing:
            overlap = int(w[i, j])
            if overlap == 0:
                continue
            union = int(pred_areas[i]) + g_area - overlap
            score += overlap * (overlap / union)
        acc.aq_sum += score / g_area
        acc.track_count += 1
    return acc


def stq(pred: PanopticVideo, gt: PanopticVideo, categories: CategorySet,
        missing_tracks_ok: bool = False) -> StqReport:
    return accumulate_stq(pred, gt, categories).report(missing_tracks_ok)
