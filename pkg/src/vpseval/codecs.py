"""Bit-exact directory codecs for panoptic and semantic videos.

Layout per video:
  panoptic: frame_000000.png ... (RGB, segment_id = R + 256*G + 65536*B)
            plus segments.json mapping decimal id strings to
            {"category_id": int, "instance_id": int}
  semantic: frame_000000.png ... (single-channel 8-bit category ids, 255 = void)

Encoding is canonical: fixed filenames, fixed PNG parameters, sidecar keys
sorted numerically. Encoding the same video twice yields byte-identical
trees.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .categories import CategorySet
from .errors import CapacityError, IntegrityError, SchemaError, ShapeError
from .video import (MAX_SEGMENT_ID, PanopticVideo, Segment, SemanticVideo,
                    validate_panoptic_video, validate_semantic_video)

SIDECAR_NAME = "segments.json"

# Fixed so re-encoding is byte-identical across runs and processes.
_PNG_SAVE_ARGS = {"format": "PNG", "compress_level": 6, "optimize": False}


def _frame_paths(dir_path: Path) -> list[Path]:
    paths = sorted(dir_path.glob("*.png"))
    if not paths:
        raise SchemaError(f"no frame images found in {dir_path}")
    return paths


def _frame_name(index: int) -> str:
    return f"frame_{index:06d}.png"


def encode_panoptic_video(video: PanopticVideo, dir_path: str | Path) -> None:
    """Write a panoptic video directory in the canonical encoding."""
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    maps = video.segment_maps
    if maps.max(initial=0) > MAX_SEGMENT_ID:
        raise CapacityError("segment id exceeds the 24-bit encoding limit")
    for t in range(video.num_frames):
        sid = maps[t].astype(np.uint32)
        rgb = np.empty(sid.shape + (3,), dtype=np.uint8)
        rgb[..., 0] = sid & 0xFF
        rgb[..., 1] = (sid >> 8) & 0xFF
        rgb[..., 2] = (sid >> 16) & 0xFF
        Image.fromarray(rgb, mode="RGB").save(dir_path / _frame_name(t), **_PNG_SAVE_ARGS)
    table = {
        str(sid): {"category_id": seg.category_id, "instance_id": seg.instance_id}
        for sid, seg in sorted(video.segments.items())
    }
    (dir_path / SIDECAR_NAME).write_text(json.dumps(table, indent=2) + "\n")


def decode_panoptic_video(dir_path: str | Path,
                          categories: CategorySet) -> PanopticVideo:
    """Read a panoptic video directory and validate it against the registry."""
    dir_path = Path(dir_path)
    sidecar = dir_path / SIDECAR_NAME
    if not sidecar.is_file():
        raise SchemaError(f"missing {SIDECAR_NAME} in {dir_path}")
    try:
        raw = json.loads(sidecar.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"cannot parse {sidecar}: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaError("segment table must be an object keyed by segment id")
    segments: dict[int, Segment] = {}
    for key, val in raw.items():
        try:
            sid = int(key)
        except ValueError:
            raise SchemaError(f"segment table key {key!r} is not a decimal id")
        if not isinstance(val, dict) or val.keys() != {"category_id", "instance_id"}:
            raise SchemaError(f"segment table entry {key} must have exactly "
                              "category_id and instance_id")
        segments[sid] = Segment(int(val["category_id"]), int(val["instance_id"]))

    frames = []
    shape = None
    for path in _frame_paths(dir_path):
        with Image.open(path) as img:
            if img.mode != "RGB":
                raise SchemaError(f"{path} is not an RGB image (mode {img.mode})")
            rgb = np.asarray(img, dtype=np.uint32)
        if shape is None:
            shape = rgb.shape
        elif rgb.shape != shape:
            raise IntegrityError(
                f"{path} has shape {rgb.shape[:2]}, expected {shape[:2]}")
        frames.append(rgb[..., 0] | (rgb[..., 1] << 8) | (rgb[..., 2] << 16))

    video = PanopticVideo(np.stack(frames), segments)
    validate_panoptic_video(video, categories)
    return video


def encode_semantic_video(video: SemanticVideo, dir_path: str | Path) -> None:
    """Write a semantic video directory in the canonical encoding."""
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    for t in range(video.num_frames):
        Image.fromarray(video.category_maps[t], mode="L").save(
            dir_path / _frame_name(t), **_PNG_SAVE_ARGS)


def decode_semantic_video(dir_path: str | Path,
                          categories: CategorySet) -> SemanticVideo:
    """Read a semantic video directory and validate it against the registry."""
    dir_path = Path(dir_path)
    frames = []
    shape = None
    for path in _frame_paths(dir_path):
        with Image.open(path) as img:
            if img.mode != "L":
                raise SchemaError(
                    f"{path} is not a single-channel image (mode {img.mode})")
            arr = np.asarray(img, dtype=np.uint8)
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise IntegrityError(
                f"{path} has shape {arr.shape}, expected {shape}")
        frames.append(arr)
    video = SemanticVideo(np.stack(frames))
    validate_semantic_video(video, categories)
    return video
