"""In-memory video containers.

A panoptic video is a dense (T, H, W) map of segment ids plus a table
mapping each id to its (category_id, instance_id). Segment ids are
per-video: the same id names the same tube in every frame. Id 0 is void
and never appears in the table. A semantic video is a (T, H, W) map of
category ids with 255 as void.
"""

from __future__ import annotations

from typing import Iterator, Mapping, NamedTuple

import numpy as np

from .categories import VOID_CATEGORY, VOID_SEGMENT_ID, CategorySet
from .errors import CapacityError, IntegrityError, ShapeError

MAX_SEGMENT_ID = 2 ** 24 - 1  # RGB png encoding holds 24 bits


class Segment(NamedTuple):
    category_id: int
    instance_id: int


def _as_maps(maps: np.ndarray, what: str) -> np.ndarray:
    maps = np.asarray(maps)
    if maps.ndim != 3:
        raise ShapeError(f"{what} must be (frames, height, width), got shape {maps.shape}")
    if maps.shape[0] < 1:
        raise ShapeError(f"{what} must contain at least one frame")
    if maps.size == 0:
        raise ShapeError(f"{what} frames must be non-empty, got shape {maps.shape}")
    return maps


class PanopticVideo:
    """Dense segment-id maps plus the segment table for one video."""

    def __init__(self, segment_maps: np.ndarray, segments: Mapping[int, Segment]):
        maps = _as_maps(segment_maps, "segment_maps")
        if maps.min() < 0:
            raise IntegrityError("segment ids must be non-negative")
        if maps.max() > MAX_SEGMENT_ID:
            raise CapacityError(
                f"segment id {int(maps.max())} exceeds the 24-bit encoding limit")
        self.segment_maps = maps.astype(np.uint32, copy=True)
        self.segment_maps.setflags(write=False)
        self.segments = {int(k): Segment(*v) for k, v in segments.items()}
        if VOID_SEGMENT_ID in self.segments:
            raise IntegrityError("segment id 0 is reserved for void")
        for sid in self.segments:
            if sid > MAX_SEGMENT_ID:
                raise CapacityError(
                    f"segment id {sid} exceeds the 24-bit encoding limit")

    @property
    def num_frames(self) -> int:
        return self.segment_maps.shape[0]

    @property
    def frame_shape(self) -> tuple[int, int]:
        return self.segment_maps.shape[1:]

    def frame(self, t: int) -> "PanopticFrame":
        return PanopticFrame(self.segment_maps[t], self.segments)

    def frames(self) -> Iterator["PanopticFrame"]:
        for t in range(self.num_frames):
            yield self.frame(t)

    def __eq__(self, other) -> bool:
        return (isinstance(other, PanopticVideo)
                and np.array_equal(self.segment_maps, other.segment_maps)
                and self.segments == other.segments)

    def __repr__(self) -> str:
        t, h, w = self.segment_maps.shape
        return f"PanopticVideo({t} frames, {h}x{w}, {len(self.segments)} segments)"


class PanopticFrame:
    """A single-frame view into a PanopticVideo (shares its table)."""

    def __init__(self, segment_map: np.ndarray, segments: Mapping[int, Segment]):
        segment_map = np.asarray(segment_map)
        if segment_map.ndim != 2:
            raise ShapeError(f"segment_map must be 2-d, got shape {segment_map.shape}")
        self.segment_map = segment_map
        self.segments = segments

    def as_video(self) -> PanopticVideo:
        return PanopticVideo(self.segment_map[None], self.segments)


class SemanticVideo:
    """Dense per-pixel category ids; 255 marks void."""

    def __init__(self, category_maps: np.ndarray):
        maps = _as_maps(category_maps, "category_maps")
        if maps.min() < 0 or maps.max() > 255:
            raise CapacityError("semantic category values must fit in 8 bits")
        self.category_maps = maps.astype(np.uint8, copy=True)
        self.category_maps.setflags(write=False)

    @property
    def num_frames(self) -> int:
        return self.category_maps.shape[0]

    @property
    def frame_shape(self) -> tuple[int, int]:
        return self.category_maps.shape[1:]

    def __eq__(self, other) -> bool:
        return (isinstance(other, SemanticVideo)
                and np.array_equal(self.category_maps, other.category_maps))

    def __repr__(self) -> str:
        t, h, w = self.category_maps.shape
        return f"SemanticVideo({t} frames, {h}x{w})"


def validate_panoptic_video(video: PanopticVideo, categories: CategorySet) -> None:
    """Check the video against the registry; raise IntegrityError if broken.

    Every pixel id must be void or in the table, every table category must
    be registered, thing (category, instance) pairs must be unique, and a
    stuff category may own at most one segment with instance_id 0.
    """
    present = np.unique(video.segment_maps)
    for sid in present:
        sid = int(sid)
        if sid != VOID_SEGMENT_ID and sid not in video.segments:
            raise IntegrityError(f"segment id {sid} appears in pixels but not in the table")
    thing_pairs = set()
    stuff_owner: dict[int, int] = {}
    for sid, seg in video.segments.items():
        if seg.category_id not in categories:
            raise IntegrityError(
                f"segment {sid} uses unregistered category {seg.category_id}")
        if categories.is_thing(seg.category_id):
            if seg.instance_id < 1:
                raise IntegrityError(
                    f"thing segment {sid} must have instance_id >= 1")
            pair = (seg.category_id, seg.instance_id)
            if pair in thing_pairs:
                raise IntegrityError(
                    f"duplicate thing identity {pair} (segment {sid})")
            thing_pairs.add(pair)
        else:
            if seg.instance_id != 0:
                raise IntegrityError(
                    f"stuff segment {sid} must have instance_id 0")
            if seg.category_id in stuff_owner:
                raise IntegrityError(
                    f"stuff category {seg.category_id} owned by segments "
                    f"{stuff_owner[seg.category_id]} and {sid}")
            stuff_owner[seg.category_id] = sid


def validate_semantic_video(video: SemanticVideo, categories: CategorySet) -> None:
    present = np.unique(video.category_maps)
    for cat in present:
        cat = int(cat)
        if cat != VOID_CATEGORY and cat not in categories:
            raise IntegrityError(f"semantic map contains unregistered category {cat}")


def semantic_collapse(video: PanopticVideo) -> SemanticVideo:
    """Project a panoptic video to its semantic map (void stays void)."""
    max_sid = int(video.segment_maps.max(initial=0))
    lut = np.full(max_sid + 1, VOID_CATEGORY, dtype=np.int64)
    lut[VOID_SEGMENT_ID] = VOID_CATEGORY
    for sid, seg in video.segments.items():
        if seg.category_id > 254:
            raise CapacityError(
                f"category {seg.category_id} cannot be stored in an 8-bit semantic map")
        if sid <= max_sid:
            lut[sid] = seg.category_id
    return SemanticVideo(lut[video.segment_maps])
