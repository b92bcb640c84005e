import json

import numpy as np
import pytest

from vpseval import (MetricAccumulator, PanopticVideo, SemanticVideo,
                     dump_categories, encode_panoptic_video,
                     encode_semantic_video)
from vpseval.cli import main
from vpseval.report import format_percent, format_real, strip_timing


@pytest.fixture
def cats_file(tmp_path, cats):
    path = tmp_path / "categories.json"
    dump_categories(cats, path)
    return str(path)


@pytest.fixture
def scene_file(tmp_path):
    path = tmp_path / "scene.json"
    path.write_text(json.dumps({
        "width": 48, "height": 32, "frames": 8, "n_things": 3,
        "stuff_layout": [1, 2, 3], "seed": 21,
    }))
    return str(path)


def synth_tree(tmp_path, cats_file, scene_file, count=2, corruption=None):
    root = tmp_path / "data"
    argv = ["synth", "--scene", scene_file, "--categories", cats_file,
            "--out", str(root), "--count", str(count)]
    if corruption is not None:
        corrupt_file = tmp_path / "corruption.json"
        corrupt_file.write_text(json.dumps(corruption))
        argv += ["--corrupt", str(corrupt_file)]
    assert main(argv) == 0
    return root


def tree_bytes(root):
    return {p.relative_to(root): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


# ---------------------------------------------------------------- vpq

def test_vpq_identity_scores_one(tmp_path, cats_file, scene_file):
    root = synth_tree(tmp_path, cats_file, scene_file)
    out = tmp_path / "report.json"
    code = main(["vpq", "--gt", str(root / "gt"), "--pred", str(root / "pred"),
                 "--categories", cats_file, "--out", str(out)])
    assert code == 0
    data = json.loads(out.read_text())
    assert data["aggregate"]["mean_vpq"]["value"] == 1.0
    assert data["aggregate"]["mean_vpq"]["percent"] == "100.0000"
    assert sorted(data["videos"]) == ["video_0000", "video_0001"]
    for entry in data["videos"].values():
        for k in ("1", "2", "4", "6"):
            assert entry["vpq"][k]["value"] == 1.0


def test_vpq_single_k_mean_equals_that_k(tmp_path, cats_file, scene_file):
    root = synth_tree(tmp_path, cats_file, scene_file, count=1,
                      corruption={"stuff_flip_prob": 0.6, "seed": 5})
    out = tmp_path / "report.json"
    code = main(["vpq", "--gt", str(root / "gt"), "--pred", str(root / "pred"),
                 "--categories", cats_file, "--k", "1", "--out", str(out)])
    assert code == 0
    data = json.loads(out.read_text())
    assert list(data["aggregate"]["vpq"]) == ["1"]
    assert (data["aggregate"]["mean_vpq"]["value"]
            == data["aggregate"]["vpq"]["1"]["value"])


def test_vpq_per_video_average_differs_from_pooled(tmp_path, cats_file,
                                                   scene_file):
    root = synth_tree(tmp_path, cats_file, scene_file, count=3,
                      corruption={"stuff_flip_prob": 0.5,
                                  "void_hole_rate": 0.1, "seed": 2})
    pooled_out = tmp_path / "pooled.json"
    avg_out = tmp_path / "avg.json"
    base = ["vpq", "--gt", str(root / "gt"), "--pred", str(root / "pred"),
            "--categories", cats_file, "--k", "1,2"]
    assert main(base + ["--out", str(pooled_out)]) == 0
    assert main(base + ["--per-video-average", "--out", str(avg_out)]) == 0
    pooled = json.loads(pooled_out.read_text())
    averaged = json.loads(avg_out.read_text())
    for k in ("1", "2"):
        videos = [v["vpq"][k]["value"] for v in averaged["videos"].values()]
        expect = sum(videos) / len(videos)
        assert averaged["aggregate"]["vpq"][k]["value"] == pytest.approx(expect)
    assert pooled["videos"] == averaged["videos"]


def test_vpq_missing_pred_dir_is_manifest_error(tmp_path, cats_file,
                                                scene_file):
    root = synth_tree(tmp_path, cats_file, scene_file, count=1)
    code = main(["vpq", "--gt", str(root / "gt"),
                 "--pred", str(root / "nonexistent"),
                 "--categories", cats_file])
    assert code == 2


def test_vpq_all_void_data_is_undefined(tmp_path, cats_file):
    blank = PanopticVideo(np.zeros((2, 4, 4), dtype=np.uint32), {})
    for role in ("gt", "pred"):
        encode_panoptic_video(blank, tmp_path / role / "video_0000")
    code = main(["vpq", "--gt", str(tmp_path / "gt"),
                 "--pred", str(tmp_path / "pred"), "--categories", cats_file])
    assert code == 3


def test_vpq_window_longer_than_videos_is_undefined(tmp_path, cats_file,
                                                    scene_file):
    root = synth_tree(tmp_path, cats_file, scene_file, count=1)  # 8 frames
    code = main(["vpq", "--gt", str(root / "gt"), "--pred", str(root / "pred"),
                 "--categories", cats_file, "--k", "9"])
    assert code == 3


def test_vpq_corrupt_sidecar_is_data_error(tmp_path, cats_file, scene_file):
    root = synth_tree(tmp_path, cats_file, scene_file, count=1)
    sidecar = root / "pred" / "video_0000" / "segments.json"
    sidecar.write_text("{not json")
    code = main(["vpq", "--gt", str(root / "gt"), "--pred", str(root / "pred"),
                 "--categories", cats_file])
    assert code == 4


def test_vpq_bad_k_values(tmp_path, cats_file, scene_file):
    root = synth_tree(tmp_path, cats_file, scene_file, count=1)
    base = ["vpq", "--gt", str(root / "gt"), "--pred", str(root / "pred"),
            "--categories", cats_file]
    assert main(base + ["--k", "0"]) == 2
    assert main(base + ["--k", "one,two"]) == 2
    assert main(base + ["--k", ""]) == 2


def test_report_self_consistency(tmp_path, cats_file, scene_file):
    root = synth_tree(tmp_path, cats_file, scene_file, count=3,
                      corruption={"stuff_flip_prob": 0.4, "seed": 9})
    out = tmp_path / "report.json"
    assert main(["vpq", "--gt", str(root / "gt"), "--pred", str(root / "pred"),
                 "--categories", cats_file, "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    for k in ("1", "2", "4", "6"):
        merged = MetricAccumulator(int(k))
        for vid_tallies in data["tallies"]["per_video"].values():
            merged.merge(MetricAccumulator.from_dict(vid_tallies["vpq"][k]))
        assert merged.value() == pytest.approx(
            data["aggregate"]["vpq"][k]["value"], abs=1e-12)


# ---------------------------------------------------------------- stq

def test_stq_identity_scores_one(tmp_path, cats_file, scene_file):
    root = synth_tree(tmp_path, cats_file, scene_file)
    out = tmp_path / "report.json"
    code = main(["stq", "--gt", str(root / "gt"), "--pred", str(root / "pred"),
                 "--categories", cats_file, "--out", str(out)])
    assert code == 0
    data = json.loads(out.read_text())
    assert data["aggregate"]["stq"]["value"] == pytest.approx(1.0)
    assert data["aggregate"]["sq"]["value"] == pytest.approx(1.0)
    assert data["aggregate"]["aq"]["value"] == pytest.approx(1.0)


# ---------------------------------------------------------------- fuse

def test_fuse_disabled_stages_reencode_identically(tmp_path, cats_file,
                                                   scene_file):
    root = synth_tree(tmp_path, cats_file, scene_file, count=2)
    out = tmp_path / "fused"
    code = main(["fuse", "--pred", str(root / "pred"),
                 "--semantic", str(root / "semantic"),
                 "--categories", cats_file, "--out", str(out),
                 "--no-stuff-correction", "--no-single-thing"])
    assert code == 0
    for vid in ("video_0000", "video_0001"):
        assert tree_bytes(out / vid) == tree_bytes(root / "pred" / vid)
    report = json.loads((out / "report.json").read_text())
    assert report["aggregate"] == {"relabeled_stuff": 0, "relabeled_things": 0,
                                   "filled_void_pixels": 0}


def test_fuse_corrects_flipped_stuff(tmp_path, cats_file, scene_file):
    root = synth_tree(tmp_path, cats_file, scene_file, count=1,
                      corruption={"stuff_flip_prob": 1.0, "seed": 4})
    out = tmp_path / "fused"
    assert main(["fuse", "--pred", str(root / "pred"),
                 "--semantic", str(root / "semantic"),
                 "--categories", cats_file, "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["aggregate"]["relabeled_stuff"] == 3
    vpq_out = tmp_path / "vpq.json"
    assert main(["vpq", "--gt", str(root / "gt"), "--pred", str(out),
                 "--categories", cats_file, "--out", str(vpq_out)]) == 0
    fixed = json.loads(vpq_out.read_text())
    assert fixed["aggregate"]["mean_vpq"]["value"] == pytest.approx(1.0)


def test_fuse_shape_mismatch_is_data_error(tmp_path, cats_file, scene_file):
    root = synth_tree(tmp_path, cats_file, scene_file, count=1)
    wrong = SemanticVideo(np.full((5, 8, 8), 255, dtype=np.uint8))
    encode_semantic_video(wrong, root / "semantic" / "video_0000")
    code = main(["fuse", "--pred", str(root / "pred"),
                 "--semantic", str(root / "semantic"),
                 "--categories", cats_file, "--out", str(tmp_path / "fused")])
    assert code == 4


def test_fuse_threshold_flags_reach_config(tmp_path, cats_file, scene_file):
    root = synth_tree(tmp_path, cats_file, scene_file, count=1)
    out = tmp_path / "fused"
    assert main(["fuse", "--pred", str(root / "pred"),
                 "--semantic", str(root / "semantic"),
                 "--categories", cats_file, "--out", str(out),
                 "--stuff-vote-threshold", "0.9",
                 "--thing-vote-threshold", "0.8", "--fill-void"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["config"]["stuff_vote_threshold"] == 0.9
    assert report["config"]["thing_vote_threshold"] == 0.8
    assert report["config"]["enable_void_fill"] is True
    assert main(["fuse", "--pred", str(root / "pred"),
                 "--semantic", str(root / "semantic"),
                 "--categories", cats_file, "--out", str(out),
                 "--stuff-vote-threshold", "1.5"]) == 2


# ---------------------------------------------------------------- synth

def test_synth_rejects_bad_spec_files(tmp_path, cats_file):
    bad = tmp_path / "scene.json"
    out = str(tmp_path / "data")
    bad.write_text("[1, 2]")
    assert main(["synth", "--scene", str(bad), "--categories", cats_file,
                 "--out", out]) == 2
    bad.write_text(json.dumps({"width": 8}))
    assert main(["synth", "--scene", str(bad), "--categories", cats_file,
                 "--out", out]) == 2
    bad.write_text(json.dumps({"width": 8, "height": 8, "frames": 2,
                               "n_things": 0, "stuff_layout": [1],
                               "bogus": 1}))
    assert main(["synth", "--scene", str(bad), "--categories", cats_file,
                 "--out", out]) == 2


def test_synth_count_seeds_are_distinct(tmp_path, cats_file, scene_file):
    root = synth_tree(tmp_path, cats_file, scene_file, count=2)
    a = tree_bytes(root / "gt" / "video_0000")
    b = tree_bytes(root / "gt" / "video_0001")
    assert set(a) == set(b)
    assert a != b


def test_synth_seed_flag_overrides_scene_seed(tmp_path, cats_file, scene_file):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for root, extra in ((a, ["--seed", "21"]), (b, [])):
        assert main(["synth", "--scene", scene_file, "--categories", cats_file,
                     "--out", str(root)] + extra) == 0
    assert tree_bytes(a) == tree_bytes(b)  # scene seed is already 21


# ---------------------------------------------------------------- report

def test_report_command_round_trip(tmp_path, cats_file, scene_file, capsys):
    root = synth_tree(tmp_path, cats_file, scene_file, count=1)
    saved = tmp_path / "report.json"
    assert main(["vpq", "--gt", str(root / "gt"), "--pred", str(root / "pred"),
                 "--categories", cats_file, "--out", str(saved)]) == 0
    first = capsys.readouterr().out
    rendered = tmp_path / "table.txt"
    assert main(["report", str(saved), "--out", str(rendered)]) == 0
    again = capsys.readouterr().out
    assert "VPQ" in again and "100.0000" in again
    assert again.strip() in first
    assert rendered.read_text().strip() == again.strip()


def test_report_command_rejects_garbage(tmp_path):
    bad = tmp_path / "report.json"
    bad.write_text("{}")
    assert main(["report", str(bad)]) == 4
    bad.write_text("not json")
    assert main(["report", str(bad)]) == 4


def test_format_helpers():
    assert format_percent(0.559332) == "55.9332"
    assert format_percent(1.0) == "100.0000"
    assert format_percent(0.0) == "0.0000"
    # ties round away from zero, not to even
    assert format_percent(0.0000005) == "0.0001"
    assert format_real(0.75) == "0.7500"
    assert format_real(0.123456789) == "0.1235"


def test_strip_timing_only_removes_timing():
    data = {"aggregate": {"x": 1}, "timing": {"jobs": 4, "wall_seconds": 0.2}}
    assert strip_timing(data) == {"aggregate": {"x": 1}}
    assert "timing" in data
