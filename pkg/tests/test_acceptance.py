"""End-to-end acceptance checks.

One test per shipped guarantee. Each prints a single
``ACCEPTANCE <n> <label>: PASS`` line on success (visible with -s) and
asserts its own runtime budget; tolerances are stated inline.
"""

import json
import math
import time

import numpy as np
import pytest
from PIL import Image

from vpseval import (CorruptionSpec, FusionConfig, MetricAccumulator,
                     PairCounts, SceneSpec, SchemaError, IntegrityError,
                     UndefinedMetricError, WindowSpec, accumulate_stq, corrupt,
                     decode_panoptic_video, dump_categories,
                     encode_panoptic_video, extract_overlaps, fuse, generate,
                     match_window, stq, vpq_for_k, vpq_report)
from vpseval.cli import main
from vpseval.report import format_real, strip_timing

import oracles
from conftest import random_tiny_pair


def stamp(n, label, started, budget):
    elapsed = time.perf_counter() - started
    assert elapsed < budget, (
        f"criterion {n} took {elapsed:.1f}s, budget {budget:.0f}s")
    print(f"ACCEPTANCE {n} {label}: PASS ({elapsed:.1f}s)")


def mean_vpq_of(pred, gt, ks, categories):
    counts = PairCounts(pred.segment_maps, gt.segment_maps)
    values = {}
    for k in ks:
        _, values[k] = vpq_for_k(
            extract_overlaps(pred, gt, WindowSpec(k), counts=counts),
            categories)
    return vpq_report(values).mean_vpq


def tree_bytes(root):
    return {p.relative_to(root): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


def test_acceptance_01_reported_row_aggregation():
    """Mean-over-k aggregation reproduces reference summary rows exactly
    (string equality at 4 decimals, half-up)."""
    started = time.perf_counter()
    rows = [
        ((57.0035, 56.2178, 55.5001, 55.0114), "55.9332"),
        ((58.2143, 57.4119, 56.6798, 56.1691), "57.1188"),
    ]
    for values, expect in rows:
        report = vpq_report(dict(zip((1, 2, 4, 6), values)))
        assert format_real(report.mean_vpq) == expect
    stamp(1, "per-k row aggregation", started, 5.0)


def test_acceptance_02_self_evaluation_is_exactly_one(cats):
    """VPQ^k(gt, gt) == 1.0 exactly (no tolerance) for k in {1,2,4,6} and
    STQ(gt, gt) == 1.0 over 20 generated 256x256x20 videos; budget 10 s."""
    started = time.perf_counter()
    for seed in range(20):
        gt, _ = generate(SceneSpec(256, 256, 20, 5, (1, 2, 3), seed=seed), cats)
        counts = PairCounts(gt.segment_maps, gt.segment_maps)
        for k in (1, 2, 4, 6):
            _, value = vpq_for_k(
                extract_overlaps(gt, gt, WindowSpec(k), counts=counts), cats)
            assert value == 1.0
        report = stq(gt, gt, cats)
        assert report.sq == 1.0 and report.aq == 1.0 and report.stq == 1.0
    stamp(2, "self-evaluation == 1.0", started, 10.0)


def test_acceptance_03_oracle_equivalence(tiny_cats):
    """VPQ^k (k=1 is PQ), SQ, AQ and STQ agree with brute-force per-pixel
    oracles within 1e-12 over 500 random tiny instances (<= 8x8, <= 3
    frames, <= 4 segments, 3 categories); budget 60 s."""
    started = time.perf_counter()
    instances = 0
    for seed in range(500):
        pred, gt = random_tiny_pair(seed, tiny_cats)
        for span in range(1, pred.num_frames + 1):
            expected = oracles.vpq(pred, gt, span, tiny_cats)
            tallies = oracles.vpq_tallies(pred, gt, span, tiny_cats)
            tables = list(extract_overlaps(pred, gt, WindowSpec(span)))
            if expected is None:
                with pytest.raises(UndefinedMetricError):
                    vpq_for_k(tables, tiny_cats)
                continue
            acc, value = vpq_for_k(tables, tiny_cats)
            assert abs(value - expected) <= 1e-12
            for cat, t in acc.per_category.items():
                ref = tallies.get(cat, {"tp": 0, "fp": 0, "fn": 0,
                                        "iou_sum": 0.0})
                assert (t.tp, t.fp, t.fn) == (ref["tp"], ref["fp"], ref["fn"])
                assert abs(t.iou_sum - ref["iou_sum"]) <= 1e-12
        sq, aq = oracles.stq_parts(pred, gt, tiny_cats)
        acc = accumulate_stq(pred, gt, tiny_cats)
        if sq is None or aq is None:
            with pytest.raises(UndefinedMetricError):
                acc.report()
        else:
            report = acc.report()
            assert abs(report.sq - sq) <= 1e-12
            assert abs(report.aq - aq) <= 1e-12
            assert abs(report.stq - math.sqrt(sq * aq)) <= 1e-12
        instances += 1
    assert instances >= 500
    stamp(3, "oracle equivalence, 500 instances", started, 60.0)


def test_acceptance_04_id_swap_span_sensitivity(cats):
    """Swapping two same-category ids mid-video leaves VPQ^1 at exactly the
    uncorrupted 1.0, strictly lowers VPQ^k for k in {2,4,6}, and strictly
    lowers AQ, on 10 seeds; budget 30 s."""
    started = time.perf_counter()
    for seed in range(10):
        gt, _ = generate(SceneSpec(128, 128, 12, 5, (1, 2, 3), seed=seed), cats)
        swapped = corrupt(gt, CorruptionSpec(id_swap_frame=6, seed=seed), cats)
        counts = PairCounts(swapped.segment_maps, gt.segment_maps)
        _, v1 = vpq_for_k(
            extract_overlaps(swapped, gt, WindowSpec(1), counts=counts), cats)
        assert v1 == 1.0
        for k in (2, 4, 6):
            _, vk = vpq_for_k(
                extract_overlaps(swapped, gt, WindowSpec(k), counts=counts),
                cats)
            assert vk < 1.0
        assert stq(gt, gt, cats).aq == 1.0
        assert stq(swapped, gt, cats).aq < 1.0
    stamp(4, "id-swap span sensitivity", started, 30.0)


def test_acceptance_05_ensemble_recovery(cats):
    """Stuff flips at p=0.3 plus void holes at rate 0.05, fused back with
    the exact semantic video (defaults plus void fill), restore mean VPQ
    to within 1e-9 of the uncorrupted prediction and never score below
    the corrupted prediction, on 20 seeds; budget 60 s."""
    started = time.perf_counter()
    ks = (1, 2, 4, 6)
    cfg = FusionConfig(enable_void_fill=True)
    for seed in range(20):
        gt, sem = generate(SceneSpec(128, 128, 10, 3, (1, 2, 3), seed=seed),
                           cats)
        damage = CorruptionSpec(stuff_flip_prob=0.3, void_hole_rate=0.05,
                                seed=seed)
        corrupted = corrupt(gt, damage, cats)
        fused, _ = fuse(corrupted, sem, cfg, cats)
        baseline = mean_vpq_of(gt, gt, ks, cats)
        broken = mean_vpq_of(corrupted, gt, ks, cats)
        recovered = mean_vpq_of(fused, gt, ks, cats)
        assert abs(recovered - baseline) <= 1e-9
        assert recovered >= broken
    stamp(5, "ensemble recovery within 1e-9", started, 60.0)


def test_acceptance_06_parallel_determinism(tmp_path, cats):
    """vpq over 50 videos with --jobs 1 and --jobs 8 writes byte-identical
    reports once the timing section is stripped; budget 60 s."""
    started = time.perf_counter()
    cats_file = tmp_path / "categories.json"
    dump_categories(cats, cats_file)
    scene_file = tmp_path / "scene.json"
    scene_file.write_text(json.dumps({
        "width": 64, "height": 64, "frames": 8, "n_things": 3,
        "stuff_layout": [1, 2, 3], "seed": 0}))
    damage_file = tmp_path / "damage.json"
    damage_file.write_text(json.dumps({
        "stuff_flip_prob": 0.3, "void_hole_rate": 0.02, "seed": 0}))
    data = tmp_path / "data"
    assert main(["synth", "--scene", str(scene_file), "--corrupt",
                 str(damage_file), "--categories", str(cats_file),
                 "--out", str(data), "--count", "50"]) == 0
    serialized = {}
    for jobs in (1, 8):
        out = tmp_path / f"report_jobs{jobs}.json"
        assert main(["vpq", "--gt", str(data / "gt"),
                     "--pred", str(data / "pred"),
                     "--categories", str(cats_file),
                     "--jobs", str(jobs), "--out", str(out)]) == 0
        stripped = strip_timing(json.loads(out.read_text()))
        serialized[jobs] = json.dumps(stripped, indent=2, sort_keys=True)
    assert serialized[1].encode() == serialized[8].encode()
    stamp(6, "jobs=1 report == jobs=8 report", started, 60.0)


def test_acceptance_07_codec_round_trip(tmp_path, cats):
    """encode -> decode -> encode is byte-identical over 20 videos, and
    malformed trees fail with the documented error classes; budget 10 s."""
    started = time.perf_counter()
    for seed in range(20):
        gt, _ = generate(SceneSpec(64, 64, 6, 3, (1, 2, 3), seed=seed), cats)
        first = tmp_path / "first" / f"v{seed:02d}"
        second = tmp_path / "second" / f"v{seed:02d}"
        encode_panoptic_video(gt, first)
        encode_panoptic_video(decode_panoptic_video(first, cats), second)
        assert tree_bytes(first) == tree_bytes(second)

    def fresh_tree(name):
        gt, _ = generate(SceneSpec(16, 16, 2, 0, (1, 2)), cats)
        root = tmp_path / "broken" / name
        encode_panoptic_video(gt, root)
        return root

    root = fresh_tree("missing_sidecar")
    (root / "segments.json").unlink()
    with pytest.raises(SchemaError):
        decode_panoptic_video(root, cats)

    root = fresh_tree("bad_json")
    (root / "segments.json").write_text("{oops")
    with pytest.raises(SchemaError):
        decode_panoptic_video(root, cats)

    root = fresh_tree("wrong_mode")
    Image.fromarray(np.zeros((16, 16), dtype=np.uint8), mode="L").save(
        root / "frame_000000.png")
    with pytest.raises(SchemaError):
        decode_panoptic_video(root, cats)

    root = fresh_tree("frame_size")
    Image.fromarray(np.zeros((3, 4, 3), dtype=np.uint8), mode="RGB").save(
        root / "frame_000001.png")
    with pytest.raises(IntegrityError):
        decode_panoptic_video(root, cats)

    root = fresh_tree("orphan_pixels")
    (root / "segments.json").write_text(json.dumps(
        {"1": {"category_id": 1, "instance_id": 0}}))
    with pytest.raises(IntegrityError):
        decode_panoptic_video(root, cats)

    stamp(7, "codec round-trip + rejections", started, 10.0)


def test_acceptance_08_throughput(cats):
    """All four k evaluated over 100 videos of 20 frames at 256x256 in
    under 60 s of evaluation time (generation excluded), via the pooled
    confusion-histogram kernel."""
    ks = (1, 2, 4, 6)
    merged = {k: MetricAccumulator(k) for k in ks}
    eval_seconds = 0.0
    for seed in range(100):
        gt, _ = generate(SceneSpec(256, 256, 20, 5, (1, 2, 3), seed=seed),
                         cats)
        pred = corrupt(gt, CorruptionSpec(stuff_flip_prob=0.3,
                                          void_hole_rate=0.02, seed=seed),
                       cats)
        t0 = time.perf_counter()
        counts = PairCounts(pred.segment_maps, gt.segment_maps)
        for k in ks:
            acc = MetricAccumulator(k)
            for table in extract_overlaps(pred, gt, WindowSpec(k),
                                          counts=counts):
                acc.add_window(match_window(table))
            merged[k].merge(acc)
        eval_seconds += time.perf_counter() - t0
    values = {k: merged[k].value() for k in ks}
    for k in ks:
        assert 0.0 < values[k] <= 1.0
    assert eval_seconds < 60.0, f"evaluation took {eval_seconds:.1f}s"
    print(f"ACCEPTANCE 8 throughput: PASS "
          f"({eval_seconds:.1f}s evaluation over 100 videos, k=1,2,4,6)")
