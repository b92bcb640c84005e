"""Synthetic videos with exact ground truth, plus parameterized damage.

A scene is horizontal stuff bands with moving rectangle/ellipse things
painted over them in id order (later ids occlude earlier). Motion is
integer velocity with wrap-around, so every tube's geometry is exactly
recomputable by a naive oracle. All randomness comes from one counter-mode
stream (rng module); the draw order is documented per stage so identical
specs reproduce bit-exactly anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .categories import CategorySet
from .errors import SpecError
from .rng import SplitMix64
from .video import (PanopticVideo, Segment, SemanticVideo, semantic_collapse,
                    validate_panoptic_video)

RECT, ELLIPSE = 0, 1


@dataclass(frozen=True)
class SceneSpec:
    """Deterministic scene description; equal specs yield equal videos.

    stuff_layout lists distinct stuff category ids, one horizontal band
    each, top to bottom. motion fixes per-thing (dx, dy) velocities; when
    omitted they are drawn from the stream.
    """

    width: int
    height: int
    frames: int
    n_things: int
    stuff_layout: tuple[int, ...]
    motion: Optional[tuple[tuple[int, int], ...]] = None
    seed: int = 0


@dataclass(frozen=True)
class CorruptionSpec:
    stuff_flip_prob: float = 0.0
    thing_flip_prob: float = 0.0
    id_swap_frame: Optional[int] = None
    erode_radius: int = 0
    void_hole_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("stuff_flip_prob", "thing_flip_prob", "void_hole_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise SpecError(f"{name} must be in [0, 1], got {v}")
        if self.erode_radius < 0:
            raise SpecError(f"erode_radius must be >= 0, got {self.erode_radius}")


def _wrap_offsets(n: int, center: int) -> np.ndarray:
    """Signed torus distance of coordinates 0..n-1 from center."""
    return (np.arange(n, dtype=np.int64) - center + n // 2) % n - n // 2


def _thing_mask(width: int, height: int, cx: int, cy: int,
                hw: int, hh: int, shape: int) -> np.ndarray:
    dx = _wrap_offsets(width, cx)
    dy = _wrap_offsets(height, cy)
    if shape == RECT:
        return (np.abs(dy) <= hh)[:, None] & (np.abs(dx) <= hw)[None, :]
    return ((dx[None, :] * hh) ** 2 + (dy[:, None] * hw) ** 2) <= (hw * hh) ** 2


def _validate_scene(spec: SceneSpec, categories: CategorySet) -> None:
    if spec.width < 1 or spec.height < 1:
        raise SpecError(f"frame size {spec.width}x{spec.height} is not positive")
    if spec.frames < 1:
        raise SpecError("a scene needs at least one frame")
    if spec.n_things < 0:
        raise SpecError("n_things must be >= 0")
    if not spec.stuff_layout:
        raise SpecError("stuff_layout needs at least one band")
    if len(set(spec.stuff_layout)) != len(spec.stuff_layout):
        raise SpecError("stuff_layout categories must be distinct")
    for cat in spec.stuff_layout:
        if not categories.is_stuff(cat):
            raise SpecError(f"stuff_layout category {cat} is not a stuff category")
    if spec.n_things > 0 and not categories.thing_ids:
        raise SpecError("scene asks for things but the registry has no thing category")
    if spec.motion is not None and len(spec.motion) != spec.n_things:
        raise SpecError(
            f"motion lists {len(spec.motion)} velocities for {spec.n_things} things")


def generate(spec: SceneSpec,
             categories: CategorySet) -> tuple[PanopticVideo, SemanticVideo]:
    """Build (ground truth, exact semantic collapse) for a scene.

    Stream consumption per thing, in id order: shape (1 draw), half-width
    (1), half-height (1), center x (1), center y (1), then dx and dy
    (2 draws) only when the scene does not fix motion.
    """
    _validate_scene(spec, categories)
    w, h, t = spec.width, spec.height, spec.frames
    rng = SplitMix64(spec.seed)
    bands = len(spec.stuff_layout)
    rows = np.arange(h, dtype=np.int64) * bands // h
    base = (rows + 1).astype(np.uint32)[:, None] * np.ones(w, dtype=np.uint32)

    segments: dict[int, Segment] = {
        b + 1: Segment(cat, 0) for b, cat in enumerate(spec.stuff_layout)
    }
    thing_cats = sorted(categories.thing_ids)
    things = []
    max_hw = max(2, w // 6)
    max_hh = max(2, h // 6)
    for i in range(spec.n_things):
        shape = rng.randint(2)
        hw = 2 + rng.randint(max_hw - 1)
        hh = 2 + rng.randint(max_hh - 1)
        cx = rng.randint(w)
        cy = rng.randint(h)
        if spec.motion is None:
            dx = rng.randint(7) - 3
            dy = rng.randint(7) - 3
        else:
            dx, dy = spec.motion[i]
        if 2 * hw + 1 > w or 2 * hh + 1 > h:
            raise SpecError(
                f"instance larger than frame: extent {2*hw+1}x{2*hh+1} "
                f"in {w}x{h}")
        cat = thing_cats[i % len(thing_cats)]
        instance = i // len(thing_cats) + 1
        segments[bands + 1 + i] = Segment(cat, instance)
        things.append((shape, hw, hh, cx, cy, dx, dy))

    maps = np.empty((t, h, w), dtype=np.uint32)
    for frame in range(t):
        canvas = base.copy()
        for i, (shape, hw, hh, cx, cy, dx, dy) in enumerate(things):
            mask = _thing_mask(w, h, (cx + dx * frame) % w,
                               (cy + dy * frame) % h, hw, hh, shape)
            canvas[mask] = bands + 1 + i
        maps[frame] = canvas

    gt = PanopticVideo(maps, segments)
    validate_panoptic_video(gt, categories)
    return gt, semantic_collapse(gt)


def _flip_stuff(segments: dict[int, Segment], rng: SplitMix64, prob: float,
                categories: CategorySet) -> None:
    """Flip stuff tube categories, keeping one segment per stuff category.

    One uniform draw per stuff tube decides the flip; targets are then
    drawn in ascending id order from the registry's stuff categories minus
    those held by unflipped tubes or already assigned (cats being vacated
    by other flips stay available). At most the last flip can find an
    empty pool, in which case it is skipped.
    """
    stuff_sids = sorted(s for s, seg in segments.items()
                        if categories.is_stuff(seg.category_id))
    flips = [sid for sid in stuff_sids if rng.uniform() < prob]
    flip_set = set(flips)
    blocked = {segments[sid].category_id
               for sid in stuff_sids if sid not in flip_set}
    all_stuff = sorted(categories.stuff_ids)
    for sid in flips:
        own = segments[sid].category_id
        pool = [c for c in all_stuff
                if c != own and c not in blocked]
        if not pool:
            continue
        target = pool[rng.randint(len(pool))]
        blocked.add(target)
        segments[sid] = Segment(target, 0)


def _flip_lone_things(segments: dict[int, Segment], rng: SplitMix64,
                      prob: float, categories: CategorySet) -> None:
    """Move lone-instance thing tubes to a thing category unused in the video."""
    by_cat: dict[int, list[int]] = {}
    for sid, seg in segments.items():
        if categories.is_thing(seg.category_id):
            by_cat.setdefault(seg.category_id, []).append(sid)
    lone = sorted(sids[0] for sids in by_cat.values() if len(sids) == 1)
    in_use = set(by_cat)
    for sid in lone:
        if rng.uniform() >= prob:
            continue
        pool = [c for c in sorted(categories.thing_ids) if c not in in_use]
        if not pool:
            continue
        target = pool[rng.randint(len(pool))]
        in_use.add(target)
        in_use.discard(segments[sid].category_id)
        segments[sid] = Segment(target, segments[sid].instance_id)


def _swap_pair(maps: np.ndarray, segments: dict[int, Segment], rng: SplitMix64,
               frame: int, categories: CategorySet) -> None:
    """Swap two same-category thing ids from `frame` onward.

    Requiring the same category keeps every per-frame (category, mask)
    partition identical so only cross-frame identity is damaged; both ids
    must have pixels before and after the swap point or nothing changes.
    """
    t = maps.shape[0]
    if not 0 <= frame < t:
        raise SpecError(f"id_swap_frame {frame} outside video of {t} frames")
    thing_sids = sorted(s for s, seg in segments.items()
                        if categories.is_thing(seg.category_id))
    before = {s: bool((maps[:frame] == s).any()) for s in thing_sids}
    after = {s: bool((maps[frame:] == s).any()) for s in thing_sids}
    eligible = []
    for i, a in enumerate(thing_sids):
        for b in thing_sids[i + 1:]:
            if (segments[a].category_id == segments[b].category_id
                    and before[a] and after[a] and before[b] and after[b]):
                eligible.append((a, b))
    if not eligible:
        raise SpecError(
            "id swap needs two same-category thing tubes with pixels on "
            "both sides of the swap frame")
    a, b = eligible[rng.randint(len(eligible))]
    tail = maps[frame:]
    was_a = tail == a
    tail[tail == b] = a
    tail[was_a] = b


def _erode_things(maps: np.ndarray, segments: dict[int, Segment], radius: int,
                  categories: CategorySet) -> None:
    """Erode each thing mask by the 4-neighborhood, wrapped; lost pixels -> void."""
    thing_sids = sorted(s for s, seg in segments.items()
                        if categories.is_thing(seg.category_id))
    for sid in thing_sids:
        mask = maps == sid
        kept = mask
        for _ in range(radius):
            kept = (kept
                    & np.roll(kept, 1, axis=1) & np.roll(kept, -1, axis=1)
                    & np.roll(kept, 1, axis=2) & np.roll(kept, -1, axis=2))
        maps[mask & ~kept] = 0


def _punch_holes(maps: np.ndarray, segments: dict[int, Segment],
                 rng: SplitMix64, rate: float, categories: CategorySet) -> None:
    """Void out stuff pixels by a per-pixel Bernoulli draw.

    Draws one block of frames*h*w variates regardless of where stuff lies,
    so the stream position never depends on content.
    """
    coin = rng.bernoulli_block(maps.size, rate).reshape(maps.shape)
    max_sid = int(maps.max(initial=0))
    stuff_lut = np.zeros(max_sid + 1, dtype=bool)
    for sid, seg in segments.items():
        if sid <= max_sid and categories.is_stuff(seg.category_id):
            stuff_lut[sid] = True
    maps[coin & stuff_lut[maps]] = 0


def corrupt(gt: PanopticVideo, spec: CorruptionSpec,
            categories: CategorySet) -> PanopticVideo:
    """Apply the requested damages in a fixed order, deterministically.

    Stage order (a stage consumes stream draws only when its parameter is
    active): stuff category flips, lone-thing category flips, id swap,
    thing-mask erosion, void holes on stuff pixels.
    """
    rng = SplitMix64(spec.seed)
    maps = gt.segment_maps.copy()
    segments = dict(gt.segments)
    if spec.stuff_flip_prob > 0:
        _flip_stuff(segments, rng, spec.stuff_flip_prob, categories)
    if spec.thing_flip_prob > 0:
        _flip_lone_things(segments, rng, spec.thing_flip_prob, categories)
    if spec.id_swap_frame is not None:
        _swap_pair(maps, segments, rng, spec.id_swap_frame, categories)
    if spec.erode_radius > 0:
        _erode_things(maps, segments, spec.erode_radius, categories)
    if spec.void_hole_rate > 0:
        _punch_holes(maps, segments, rng, spec.void_hole_rate, categories)
    out = PanopticVideo(maps, segments)
    validate_panoptic_video(out, categories)
    return out
