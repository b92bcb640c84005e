import numpy as np
import pytest

from vpseval import (Category, CategorySet, PanopticVideo, Segment, SplitMix64,
                     validate_panoptic_video)


@pytest.fixture
def cats() -> CategorySet:
    """Mixed registry: 6 stuff bands' worth plus 3 thing categories."""
    return CategorySet([
        Category(1, "sky", False), Category(2, "road", False),
        Category(3, "grass", False), Category(4, "water", False),
        Category(5, "sand", False), Category(6, "rock", False),
        Category(10, "car", True), Category(11, "person", True),
        Category(12, "dog", True),
    ])


@pytest.fixture
def tiny_cats() -> CategorySet:
    """Three categories for oracle-equivalence instances."""
    return CategorySet([
        Category(1, "ground", False),
        Category(2, "box", True),
        Category(3, "ball", True),
    ])


def video_from(maps, segments) -> PanopticVideo:
    """Literal-array helper: segments as {sid: (category, instance)}."""
    return PanopticVideo(np.asarray(maps, dtype=np.uint32),
                         {s: Segment(*pair) for s, pair in segments.items()})


def random_tiny_pair(seed: int, categories: CategorySet,
                     max_hw: int = 8, max_frames: int = 3,
                     max_segments: int = 4):
    """A random valid (pred, gt) pair of matching tiny shapes.

    Pixels are labeled uniformly over void plus the segment ids, so the
    pair exercises fragmented masks, absent tubes, and void freely.
    """
    rng = SplitMix64(seed)
    frames = 1 + rng.randint(max_frames)
    h = 2 + rng.randint(max_hw - 1)
    w = 2 + rng.randint(max_hw - 1)
    entries = list(categories)

    def build() -> PanopticVideo:
        segments: dict[int, Segment] = {}
        next_instance: dict[int, int] = {}
        stuff_used: set[int] = set()
        for _ in range(rng.randint(max_segments + 1)):
            cat = entries[rng.randint(len(entries))]
            if cat.isthing:
                inst = next_instance.get(cat.id, 0) + 1
                next_instance[cat.id] = inst
                segments[len(segments) + 1] = Segment(cat.id, inst)
            elif cat.id not in stuff_used:
                stuff_used.add(cat.id)
                segments[len(segments) + 1] = Segment(cat.id, 0)
        sids = [0] + sorted(segments)
        flat = rng.block_u64(frames * h * w) % len(sids)
        maps = np.array([sids[int(i)] for i in flat],
                        dtype=np.uint32).reshape(frames, h, w)
        video = PanopticVideo(maps, segments)
        validate_panoptic_video(video, categories)
        return video

    return build(), build()
