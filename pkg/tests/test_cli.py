import json

import numpy as np
import pytest

from inkscan.cli import main
from inkscan.hypercube_io import HyperCube, read_envi, write_envi
from inkscan.labelmap import TRUTH_MAGIC, decode_label_map

SYNTH_ARGS = ["--rows", "128", "--cols", "160", "--bands", "24", "--line-to-ink", "0,1,2,3"]
STAGE_ARGS = ["--band", "4", "--k", "6"]


@pytest.fixture(scope="module")
def small_doc(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--out", str(out), "--seed", "3"] + SYNTH_ARGS) == 0
    return out


def listed_files(out):
    manifest = json.loads((out / "manifest.json").read_text())
    return manifest, set(manifest["artifacts"])


def on_disk(out):
    return {p.name for p in out.iterdir() if p.name != "manifest.json"}


def test_info(tmp_path, capsys):
    write_envi(HyperCube(np.full((1, 1, 1), 0.5), [550.0]), tmp_path / "one.hdr")
    assert main(["info", str(tmp_path / "one.hdr")]) == 0
    out = capsys.readouterr().out
    assert out.startswith("1 x 1 x 1, 550.0")
    assert "float32" in out and "bsq" in out


def test_info_missing_file(tmp_path, capsys):
    assert main(["info", str(tmp_path / "nope.hdr")]) == 2
    assert "input error" in capsys.readouterr().err


def test_synth_outputs(small_doc):
    cube = read_envi(small_doc / "synth.hdr")
    assert cube.shape == (128, 160, 24)
    gt = json.loads((small_doc / "ground_truth.json").read_text())
    assert gt["line_to_ink"] == [0, 1, 2, 3]
    labels = decode_label_map((small_doc / "ground_truth.bin").read_bytes(), TRUTH_MAGIC)
    assert labels.shape == (128, 160)
    assert set(np.unique(labels)) == {-2, -1, 0, 1, 2, 3}


def test_pipeline_run(small_doc, tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["pipeline", str(small_doc / "synth.hdr"), "--out", str(out)] + STAGE_ARGS)
    assert code == 0
    text = capsys.readouterr().out
    assert "C-1" in text and "iterations" in text
    manifest, listed = listed_files(out)
    assert listed == on_disk(out)
    assert {"segmented.png", "line_clusters.csv", "cluster_model.json", "labels.bin",
            "signatures.csv", "mask.png", "histogram.csv"} <= listed
    assert all(s["status"] == "ok" for s in manifest["stages"])
    rows = (out / "line_clusters.csv").read_text().strip().split("\n")[1:]
    clusters = [int(r.split(",")[1]) for r in rows]
    assert len(clusters) == 4 and len(set(clusters)) == 4


def test_prefix_subcommand(small_doc, tmp_path):
    out = tmp_path / "thr"
    assert main(["threshold", str(small_doc / "synth.hdr"), "--out", str(out), "--band", "4"]) == 0
    _, listed = listed_files(out)
    assert listed == on_disk(out)
    assert "mask.png" in listed and "labels.bin" not in listed


def test_segment_reuses_model(small_doc, tmp_path):
    first = tmp_path / "a"
    assert main(["pipeline", str(small_doc / "synth.hdr"), "--out", str(first)] + STAGE_ARGS) == 0
    second = tmp_path / "b"
    args = ["segment", str(small_doc / "synth.hdr"), "--out", str(second), "--model-dir", str(first)]
    assert main(args + STAGE_ARGS) == 0
    assert (first / "segmented.png").read_bytes() == (second / "segmented.png").read_bytes()


def test_one_ink_two_clusters(tmp_path):
    doc = tmp_path / "doc"
    assert main(["synth", "--out", str(doc), "--rows", "96", "--cols", "120", "--bands", "24",
                 "--line-to-ink", "2,2,2", "--no-rule-lines"]) == 0
    out = tmp_path / "run"
    assert main(["pipeline", str(doc / "synth.hdr"), "--out", str(out), "--band", "4", "--k", "2"]) == 0
    rows = (out / "line_clusters.csv").read_text().strip().split("\n")[1:]
    assert len({r.split(",")[1] for r in rows}) == 1
    assert all(float(r.split(",")[2]) == 1.0 for r in rows)


def test_truncated_raw(small_doc, tmp_path, capsys):
    src = tmp_path / "bad"
    src.mkdir()
    (src / "synth.hdr").write_bytes((small_doc / "synth.hdr").read_bytes())
    raw = (small_doc / "synth.raw").read_bytes()
    (src / "synth.raw").write_bytes(raw[: len(raw) // 2])
    out = tmp_path / "run"
    assert main(["pipeline", str(src / "synth.hdr"), "--out", str(out)]) == 2
    assert "input error" in capsys.readouterr().err
    manifest, listed = listed_files(out)
    assert listed == set() == on_disk(out)
    assert manifest["stages"][0]["status"] == "failed"


def test_stage_failure_removes_later_artifacts(small_doc, tmp_path, capsys):
    out = tmp_path / "run"
    # 12 clusters exceed the 10-color default palette, so segmentation fails
    code = main(["pipeline", str(small_doc / "synth.hdr"), "--out", str(out), "--band", "4", "--k", "12"])
    assert code == 3
    assert "segment" in capsys.readouterr().err
    manifest, listed = listed_files(out)
    assert listed == on_disk(out)
    assert "labels.bin" in listed
    assert "segmented.png" not in listed and "line_clusters.csv" not in listed
    failed = [s for s in manifest["stages"] if s["status"] == "failed"]
    assert [s["name"] for s in failed] == ["segment"]


def test_bad_flag_values(small_doc, tmp_path):
    hdr = str(small_doc / "synth.hdr")
    assert main(["pipeline", hdr, "--out", str(tmp_path / "x"), "--k", "1"]) == 2
    assert main(["crop", hdr, "--out", str(tmp_path / "y"), "--crop", "0,0,500,500"]) == 3


def test_config_file(small_doc, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"threshold_band": 4, "k": 6, "crop": [0, 0, 128, 160]}))
    out = tmp_path / "run"
    assert main(["pipeline", str(small_doc / "synth.hdr"), "--out", str(out), "--config", str(cfg)]) == 0
    params = json.loads((out / "manifest.json").read_text())["parameters"]
    assert params["k"] == 6 and params["threshold_band"] == 4
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["pipeline", str(small_doc / "synth.hdr"), "--out", str(out), "--config", str(cfg)]) == 2
