"""Semantic-vote correction of panoptic videos.

Each rule votes with a semantic segmentation over one whole tube and may
relabel the tube's category for the entire video; pixel geometry never
changes except for optional void filling. Stages run in a fixed order
(stuff, single-thing, void fill) because void filling depends on the
final stuff categories.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .categories import VOID_CATEGORY, CategorySet
from .errors import ShapeError, SpecError
from .tubes import PairCounts
from .video import PanopticVideo, Segment, SemanticVideo, validate_panoptic_video

STUFF_RELABEL = "stuff_relabel"
SINGLE_THING_RELABEL = "single_thing_relabel"
VOID_FILL = "void_fill"


@dataclass(frozen=True)
class FusionConfig:
    stuff_vote_threshold: float = 0.5
    thing_vote_threshold: float = 0.5
    enable_stuff_correction: bool = True
    enable_single_thing_correction: bool = True
    enable_void_fill: bool = False
    # "category": correct a thing tube when it is its category's only
    # instance. "video": only when it is the video's only thing tube.
    single_thing_scope: str = "category"

    def __post_init__(self):
        for name in ("stuff_vote_threshold", "thing_vote_threshold"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise SpecError(f"{name} must be in (0, 1], got {v}")
        if self.single_thing_scope not in ("category", "video"):
            raise SpecError(
                f"single_thing_scope must be 'category' or 'video', "
                f"got {self.single_thing_scope!r}")


@dataclass(frozen=True)
class AuditRecord:
    rule: str
    segment_id: int
    old_category: Optional[int]
    new_category: int
    vote_fraction: Optional[float] = None
    pixels: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "segment_id": self.segment_id,
            "old_category": self.old_category,
            "new_category": self.new_category,
            "vote_fraction": self.vote_fraction,
            "pixels": self.pixels,
        }


@dataclass
class FusionAudit:
    records: list[AuditRecord] = field(default_factory=list)

    @property
    def relabeled_stuff(self) -> int:
        return sum(1 for r in self.records if r.rule == STUFF_RELABEL)

    @property
    def relabeled_things(self) -> int:
        return sum(1 for r in self.records if r.rule == SINGLE_THING_RELABEL)

    @property
    def filled_void_pixels(self) -> int:
        return sum(r.pixels or 0 for r in self.records if r.rule == VOID_FILL)

    def extend(self, other: "FusionAudit") -> None:
        self.records.extend(other.records)

    def to_dict(self) -> dict:
        return {
            "records": [r.to_dict() for r in self.records],
            "relabeled_stuff": self.relabeled_stuff,
            "relabeled_things": self.relabeled_things,
            "filled_void_pixels": self.filled_void_pixels,
        }


def _check_shapes(pan: PanopticVideo, sem: SemanticVideo) -> None:
    if pan.segment_maps.shape != sem.category_maps.shape:
        raise ShapeError(
            f"panoptic {pan.segment_maps.shape} and semantic "
            f"{sem.category_maps.shape} videos differ in shape")


def semantic_majority(tube_mask: np.ndarray,
                      sem: SemanticVideo) -> Optional[tuple[int, float]]:
    """Majority semantic category over a tube's pixels.

    Returns (category_id, fraction of the tube's non-void semantic pixels),
    ties broken toward the smallest category id, or None when every tube
    pixel is semantic void.
    """
    tube_mask = np.asarray(tube_mask, dtype=bool)
    if tube_mask.shape != sem.category_maps.shape:
        raise ShapeError(
            f"tube mask {tube_mask.shape} and semantic "
            f"{sem.category_maps.shape} differ in shape")
    values = sem.category_maps[tube_mask]
    if values.size == 0:
        raise SpecError("semantic_majority needs a non-empty tube")
    counts = np.bincount(values, minlength=256)
    counts[VOID_CATEGORY] = 0
    total = int(counts.sum())
    if total == 0:
        return None
    winner = int(np.argmax(counts))
    return winner, int(counts[winner]) / total


class _TubeVotes:
    """Majority votes for every segment id in one pass over the video."""

    def __init__(self, pan: PanopticVideo, sem: SemanticVideo):
        counts = PairCounts(pan.segment_maps, sem.category_maps)
        self._w = counts.window(0, pan.num_frames)
        self._row = {int(sid): i for i, sid in enumerate(counts.a_ids)}
        self._sem_values = counts.b_ids
        void = counts.b_index(VOID_CATEGORY)
        if void is not None:
            self._w = self._w.copy()
            self._w[:, void] = 0

    def majority(self, segment_id: int) -> Optional[tuple[int, float]]:
        """None when the tube has no pixels or only semantic-void pixels."""
        i = self._row.get(segment_id)
        if i is None:
            return None
        row = self._w[i]
        total = int(row.sum())
        if total == 0:
            return None
        j = int(np.argmax(row))
        return int(self._sem_values[j]), int(row[j]) / total


def correct_stuff(pan: PanopticVideo, sem: SemanticVideo, cfg: FusionConfig,
                  categories: CategorySet) -> tuple[PanopticVideo, FusionAudit]:
    """Relabel whole stuff tubes by semantic majority vote.

    A tube is relabeled when the majority is a different stuff category
    with vote fraction >= the stuff threshold. Two stuff tubes ending up
    with one category merge: into the tube that already had the category
    if one exists, else into the smallest segment id.
    """
    _check_shapes(pan, sem)
    votes = _TubeVotes(pan, sem)
    audit = FusionAudit()
    stuff_sids = sorted(sid for sid, seg in pan.segments.items()
                        if categories.is_stuff(seg.category_id))
    decisions: dict[int, tuple[int, float]] = {}
    for sid in stuff_sids:
        vote = votes.majority(sid)
        if vote is None:
            continue
        new_cat, fraction = vote
        old_cat = pan.segments[sid].category_id
        if new_cat == old_cat or not categories.is_stuff(new_cat):
            continue
        if fraction >= cfg.stuff_vote_threshold:
            decisions[sid] = (new_cat, fraction)
    if not decisions:
        return pan, audit

    groups: dict[int, list[int]] = {}
    for sid in stuff_sids:
        final = decisions[sid][0] if sid in decisions else pan.segments[sid].category_id
        groups.setdefault(final, []).append(sid)

    segments = dict(pan.segments)
    remap: dict[int, int] = {}
    for cat in sorted(groups):
        sids = groups[cat]
        keepers = [s for s in sids if s not in decisions]
        canonical = keepers[0] if keepers else min(sids)
        segments[canonical] = Segment(cat, 0)
        for sid in sids:
            if sid != canonical:
                remap[sid] = canonical
                del segments[sid]
    for sid in sorted(decisions):
        new_cat, fraction = decisions[sid]
        audit.records.append(AuditRecord(
            STUFF_RELABEL, sid, pan.segments[sid].category_id, new_cat, fraction))

    maps = pan.segment_maps
    if remap:
        max_sid = int(maps.max(initial=0))
        lut = np.arange(max_sid + 1, dtype=np.uint32)
        for src, dst in remap.items():
            if src <= max_sid:
                lut[src] = dst
        maps = lut[maps]
    return PanopticVideo(maps, segments), audit


def correct_single_thing(pan: PanopticVideo, sem: SemanticVideo,
                         cfg: FusionConfig, categories: CategorySet
                         ) -> tuple[PanopticVideo, FusionAudit]:
    """Relabel thing tubes that are the only instance of their category.

    The vote must name a different thing category and clear the thing
    threshold. The instance id is kept unless it collides inside the new
    category, in which case the smallest free id >= 1 is assigned.
    """
    _check_shapes(pan, sem)
    votes = _TubeVotes(pan, sem)
    audit = FusionAudit()
    by_cat: dict[int, list[int]] = {}
    for sid, seg in pan.segments.items():
        if categories.is_thing(seg.category_id):
            by_cat.setdefault(seg.category_id, []).append(sid)
    if cfg.single_thing_scope == "video":
        total = sum(len(v) for v in by_cat.values())
        lone = sorted(s for v in by_cat.values() for s in v) if total == 1 else []
    else:
        lone = sorted(sids[0] for sids in by_cat.values() if len(sids) == 1)

    segments = dict(pan.segments)
    occupied = {(seg.category_id, seg.instance_id): sid
                for sid, seg in segments.items()
                if categories.is_thing(seg.category_id)}
    for sid in lone:
        vote = votes.majority(sid)
        if vote is None:
            continue
        new_cat, fraction = vote
        old = segments[sid]
        if new_cat == old.category_id or not categories.is_thing(new_cat):
            continue
        if fraction < cfg.thing_vote_threshold:
            continue
        del occupied[(old.category_id, old.instance_id)]
        instance = old.instance_id
        if (new_cat, instance) in occupied:
            instance = 1
            while (new_cat, instance) in occupied:
                instance += 1
        occupied[(new_cat, instance)] = sid
        segments[sid] = Segment(new_cat, instance)
        audit.records.append(AuditRecord(
            SINGLE_THING_RELABEL, sid, old.category_id, new_cat, fraction))
    if not audit.records:
        return pan, audit
    return PanopticVideo(pan.segment_maps, segments), audit


def fill_void(pan: PanopticVideo, sem: SemanticVideo, cfg: FusionConfig,
              categories: CategorySet) -> tuple[PanopticVideo, FusionAudit]:
    """Assign void pixels with stuff semantics to that category's segment.

    Joins the video's existing stuff segment when one exists, else creates
    one. Thing-category semantic pixels stay void: there is no instance
    identity to give them.
    """
    if not cfg.enable_void_fill:
        raise SpecError("fill_void called with enable_void_fill disabled")
    _check_shapes(pan, sem)
    audit = FusionAudit()
    void_mask = pan.segment_maps == 0
    if not void_mask.any():
        return pan, audit
    maps = pan.segment_maps.copy()
    segments = dict(pan.segments)
    stuff_owner = {seg.category_id: sid for sid, seg in segments.items()
                   if categories.is_stuff(seg.category_id)}
    next_id = max(segments, default=0) + 1
    for cat in sorted(categories.stuff_ids):
        hole = void_mask & (sem.category_maps == cat)
        filled = int(hole.sum())
        if filled == 0:
            continue
        sid = stuff_owner.get(cat)
        if sid is None:
            sid = next_id
            next_id += 1
            stuff_owner[cat] = sid
            segments[sid] = Segment(cat, 0)
        maps[hole] = sid
        audit.records.append(AuditRecord(VOID_FILL, sid, None, cat, pixels=filled))
    if not audit.records:
        return pan, audit
    return PanopticVideo(maps, segments), audit


def fuse(pan: PanopticVideo, sem: SemanticVideo, cfg: FusionConfig,
         categories: CategorySet) -> tuple[PanopticVideo, FusionAudit]:
    """Run the enabled correction stages in order and validate the result."""
    _check_shapes(pan, sem)
    audit = FusionAudit()
    out = pan
    if cfg.enable_stuff_correction:
        out, stage = correct_stuff(out, sem, cfg, categories)
        audit.extend(stage)
    if cfg.enable_single_thing_correction:
        out, stage = correct_single_thing(out, sem, cfg, categories)
        audit.extend(stage)
    if cfg.enable_void_fill:
        out, stage = fill_void(out, sem, cfg, categories)
        audit.extend(stage)
    validate_panoptic_video(out, categories)
    return out, audit
