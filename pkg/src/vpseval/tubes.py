"""Windowed tube extraction over a pair-count histogram kernel.

A tube is one segment id's pixels across a window of consecutive frames.
All metrics reduce to pairwise pred/gt tube overlaps, so everything here
funnels through one pass that histograms co-occurring (pred id, gt id)
pixel pairs per frame. Window tables are then differences of prefix sums,
never fresh pixel passes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional

import numpy as np

from .errors import ShapeError, SpecError
from .video import PanopticVideo


@dataclass(frozen=True)
class WindowSpec:
    """Sliding k-frame windows: [t, t + span_k) for t = 0, stride, ..."""

    span_k: int
    stride: int = 1

    def __post_init__(self):
        if self.span_k < 1:
            raise SpecError(f"span_k must be >= 1, got {self.span_k}")
        if self.stride < 1:
            raise SpecError(f"stride must be >= 1, got {self.stride}")

    def positions(self, num_frames: int) -> range:
        if num_frames < self.span_k:
            return range(0)
        return range(0, num_frames - self.span_k + 1, self.stride)

    def count(self, num_frames: int) -> int:
        return len(self.positions(num_frames))


class TubeKey(NamedTuple):
    segment_id: int
    category_id: int
    instance_id: int


@dataclass(frozen=True)
class SegmentTube:
    key: TubeKey
    area: int  # pixels inside the window; empty tubes are never built
    source: str  # "pred" or "gt"


@dataclass
class OverlapTable:
    """Sufficient statistics of one window: tubes, intersections, void."""

    video_id: str
    start: int
    span_k: int
    pred_tubes: list[SegmentTube]
    gt_tubes: list[SegmentTube]
    intersections: dict[tuple[int, int], int]  # (pred sid, gt sid) -> pixels
    gt_void_overlap: dict[int, int]  # pred sid -> pixels over gt void


class PairCounts:
    """Per-frame co-occurrence histograms of two label volumes.

    Built once per video; any window's (pred id, gt id) count matrix is a
    difference of two prefix rows. Index 0 of each axis is pinned to label
    0 (void) whether or not it occurs, so void marginals are always
    addressable.
    """

    def __init__(self, a_maps: np.ndarray, b_maps: np.ndarray):
        if a_maps.shape != b_maps.shape:
            raise ShapeError(
                f"label volumes differ in shape: {a_maps.shape} vs {b_maps.shape}")
        if a_maps.ndim != 3 or a_maps.size == 0:
            raise ShapeError("label volumes must be non-empty (frames, h, w)")
        a_ids = np.unique(a_maps)
        b_ids = np.unique(b_maps)
        if a_ids[0] != 0:
            a_ids = np.concatenate([np.zeros(1, a_ids.dtype), a_ids])
        if b_ids[0] != 0:
            b_ids = np.concatenate([np.zeros(1, b_ids.dtype), b_ids])
        self.a_ids = a_ids.astype(np.int64)
        self.b_ids = b_ids.astype(np.int64)
        t = a_maps.shape[0]
        p, g = len(self.a_ids), len(self.b_ids)
        a_idx = np.searchsorted(self.a_ids, a_maps.reshape(t, -1))
        b_idx = np.searchsorted(self.b_ids, b_maps.reshape(t, -1))
        keys = a_idx * g + b_idx + (np.arange(t, dtype=np.int64)[:, None] * (p * g))
        counts = np.bincount(keys.ravel(), minlength=t * p * g).reshape(t, p, g)
        self.prefix = np.concatenate(
            [np.zeros((1, p, g), dtype=np.int64), np.cumsum(counts, axis=0)])

    @property
    def num_frames(self) -> int:
        return self.prefix.shape[0] - 1

    def window(self, start: int, span: int) -> np.ndarray:
        """(len(a_ids), len(b_ids)) pair-count matrix for frames [start, start+span)."""
        return self.prefix[start + span] - self.prefix[start]

    def a_index(self, label: int) -> Optional[int]:
        i = int(np.searchsorted(self.a_ids, label))
        if i < len(self.a_ids) and self.a_ids[i] == label:
            return i
        return None

    def b_index(self, label: int) -> Optional[int]:
        i = int(np.searchsorted(self.b_ids, label))
        if i < len(self.b_ids) and self.b_ids[i] == label:
            return i
        return None


def pair_counts(a_maps: np.ndarray, b_maps: np.ndarray) -> PairCounts:
    return PairCounts(a_maps, b_maps)


def tube_iou(p: SegmentTube, g: SegmentTube, intersection: int) -> float:
    """IoU of two tubes from their areas and shared pixel count."""
    return intersection / (p.area + g.area - intersection)


def extract_overlaps(pred: PanopticVideo, gt: PanopticVideo, window: WindowSpec,
                     video_id: str = "",
                     counts: Optional[PairCounts] = None) -> Iterator[OverlapTable]:
    """Yield one OverlapTable per window position, in start-frame order.

    Pass a precomputed PairCounts to share the per-frame histograms across
    several window spans of the same video pair.
    """
    if pred.segment_maps.shape != gt.segment_maps.shape:
        raise ShapeError(
            f"pred {pred.segment_maps.shape} and gt {gt.segment_maps.shape} differ")
    if counts is None:
        counts = PairCounts(pred.segment_maps, gt.segment_maps)
    pred_ids = counts.a_ids
    gt_ids = counts.b_ids
    for start in window.positions(pred.num_frames):
        w = counts.window(start, window.span_k)
        pred_areas = w.sum(axis=1)
        gt_areas = w.sum(axis=0)
        pred_tubes = [
            SegmentTube(TubeKey(int(sid), *pred.segments[int(sid)]), int(area), "pred")
            for sid, area in zip(pred_ids[1:], pred_areas[1:]) if area > 0
        ]
        gt_tubes = [
            SegmentTube(TubeKey(int(sid), *gt.segments[int(sid)]), int(area), "gt")
            for sid, area in zip(gt_ids[1:], gt_areas[1:]) if area > 0
        ]
        inner = w[1:, 1:]
        pi, gi = np.nonzero(inner)
        intersections = {
            (int(pred_ids[i + 1]), int(gt_ids[j + 1])): int(inner[i, j])
            for i, j in zip(pi, gi)
        }
        void_col = w[1:, 0]
        gt_void_overlap = {
            int(sid): int(v) for sid, v in zip(pred_ids[1:], void_col) if v > 0
        }
        yield OverlapTable(video_id, start, window.span_k, pred_tubes, gt_tubes,
                           intersections, gt_void_overlap)
