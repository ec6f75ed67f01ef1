#!/usr/bin/env python3
"""
Tests for the patchlabel command line: exit codes, train / evaluate / predict /
filter / visualize / sweep / corpus commands and the overlay export
"""

import sys

import numpy as np
import pytest

from commands import Commands
from conftest import SMALL_PYRAMID, SMALL_PYRAMID_FLAGS
from core.types import Strategy
from corpus.manifest import CorpusManifest
from evaluation.overlay import class_color, read_sidecar_boxes, render_overlay
from network.checkpoint import load_checkpoint
from patching import PatchBox, plan_boxes


def run(*argv):
    return Commands().run([str(a) for a in argv])


def train_args(manifest, out, *extra):
    return ["train", "--manifest", manifest, "--out", out, "--epochs", "1", "--batch", "4",
            "--seed", "0", "--backbone", "tiny", *SMALL_PYRAMID_FLAGS, *extra]


@pytest.fixture(scope="module")
def corpus_path(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_corpus")
    assert run("synthesize", "--out", out, "--per-class", 6, "--classes", 3, "--dims", "96x72", "--seed", 1) == 0
    return out / "manifest.tsv"


@pytest.fixture(scope="module")
def detector(tmp_path_factory, corpus_path):
    out = tmp_path_factory.mktemp("cli_runs") / "det"
    assert run(*train_args(corpus_path, out, "--setting", "i-det", "--strategy", "ip")) == 0
    return out / "best.pt"


def test_parser_lists_every_command():
    commands = Commands().list_available_commands()
    assert set(commands) == {"ingest", "synthesize", "crack500", "derive", "train", "evaluate",
                             "predict", "filter", "visualize", "sweep"}


def test_alpha_out_of_range_is_usage_error(corpus_path, tmp_path):
    assert run(*train_args(corpus_path, tmp_path / "run", "--alpha", "1.5")) == 2


def test_alpha_with_slide_window_is_usage_error(corpus_path, tmp_path):
    assert run(*train_args(corpus_path, tmp_path / "run", "--strategy", "sw", "--alpha", "0.5")) == 2


def test_unknown_strategy_exits_with_usage_code(corpus_path, tmp_path):
    with pytest.raises(SystemExit) as raised:
        run(*train_args(corpus_path, tmp_path / "run", "--strategy", "grid"))
    assert raised.value.code == 2


def test_distressed_only_with_normal_entries_is_config_error(corpus_path, tmp_path):
    assert run(*train_args(corpus_path, tmp_path / "run", "--setting", "ii-rec-i")) == 3


def test_missing_manifest_is_config_error(tmp_path):
    assert run(*train_args(tmp_path / "none.tsv", tmp_path / "run")) == 3


def test_train_writes_run_directory(detector):
    run_dir = detector.parent
    for name in ("config.json", "metrics.log", "last.pt", "best.pt", "report.json"):
        assert (run_dir / name).is_file()
    _, config, _ = load_checkpoint(detector)
    assert config.class_names == ("normal", "distressed")


def test_evaluate_detection(detector, corpus_path, tmp_path):
    assert run("evaluate", "--ckpt", detector, "--manifest", corpus_path, "--setting", "i-det",
               "--out", tmp_path / "eval") == 0
    assert (tmp_path / "eval" / "report.json").is_file()
    assert (tmp_path / "eval" / "roc.tsv").is_file()


def test_two_stage_needs_detector(detector, corpus_path, tmp_path):
    assert run("evaluate", "--ckpt", detector, "--manifest", corpus_path, "--setting", "ii-rec-n",
               "--out", tmp_path / "eval") == 2


def test_two_stage_evaluation(detector, corpus_path, tmp_path):
    view = tmp_path / "distressed.tsv"
    assert run("derive", "--manifest", corpus_path, "--setting", "ii-rec-i", "--out", view) == 0
    assert CorpusManifest.load(view).normal_class is None
    assert run(*train_args(view, tmp_path / "rec", "--setting", "ii-rec-i")) == 0
    assert run("evaluate", "--ckpt", tmp_path / "rec" / "best.pt", "--detector-ckpt", detector,
               "--manifest", corpus_path, "--setting", "ii-rec-n", "--out", tmp_path / "eval") == 0
    assert '"setting": "ii-rec-n"' in (tmp_path / "eval" / "report.json").read_text()


def test_missing_checkpoint(corpus_path, tmp_path):
    assert run("filter", "--ckpt", tmp_path / "missing.pt", "--manifest", corpus_path,
               "--threshold", "0.5", "--out", tmp_path / "f") == 3
    assert run("evaluate", "--ckpt", tmp_path / "missing.pt", "--manifest", corpus_path,
               "--setting", "i-det", "--out", tmp_path / "e") == 3


def _filtered(out):
    kept = CorpusManifest.load(out / "kept.tsv")
    dropped = CorpusManifest.load(out / "dropped.tsv")
    return kept, dropped


def test_filter_thresholds(detector, corpus_path, tmp_path):
    manifest = CorpusManifest.load(corpus_path)
    assert run("filter", "--ckpt", detector, "--manifest", corpus_path, "--threshold", "0",
               "--out", tmp_path / "all") == 0
    kept, dropped = _filtered(tmp_path / "all")
    assert len(kept) == len(manifest) and len(dropped) == 0

    assert run("filter", "--ckpt", detector, "--manifest", corpus_path, "--threshold", "1.0001",
               "--out", tmp_path / "none") == 0
    kept, dropped = _filtered(tmp_path / "none")
    assert len(kept) == 0 and len(dropped) == len(manifest)


def test_filter_target_recall(detector, corpus_path, tmp_path, capsys):
    assert run("filter", "--ckpt", detector, "--manifest", corpus_path, "--target-recall", "0.95",
               "--out", tmp_path / "f") == 0
    kept, dropped = _filtered(tmp_path / "f")
    assert {e.path for e in kept.entries} | {e.path for e in dropped.entries} == \
        {e.path for e in CorpusManifest.load(corpus_path).entries}
    distressed_kept = sum(e.class_name != "normal" for e in kept.entries)
    distressed_total = distressed_kept + sum(e.class_name != "normal" for e in dropped.entries)
    assert distressed_kept / distressed_total >= 0.95
    assert "kept-set recall" in capsys.readouterr().out


def test_visualize_sidecar_matches_geometry(detector, corpus_path, tmp_path):
    manifest = CorpusManifest.load(corpus_path)
    image = manifest.absolute_path(manifest.entries[-1])
    assert run("visualize", "--ckpt", detector, "--image", image, "--out", tmp_path / "viz") == 0
    sidecar = tmp_path / "viz" / f"{image.stem}.tsv"
    assert (tmp_path / "viz" / f"{image.stem}.png").is_file()
    _, config, _ = load_checkpoint(detector)
    expected = plan_boxes(config.strategy, config.pyramid, config.effective_alpha, config.max_combinations)
    assert read_sidecar_boxes(sidecar) == list(expected)


def test_visualize_strategy_mismatch(detector, corpus_path, tmp_path):
    manifest = CorpusManifest.load(corpus_path)
    image = manifest.absolute_path(manifest.entries[0])
    assert run("visualize", "--ckpt", detector, "--image", image, "--strategy", "ss",
               "--out", tmp_path / "viz") == 3


def test_predict_table(detector, corpus_path, tmp_path):
    out = tmp_path / "predictions.tsv"
    assert run("predict", "--ckpt", detector, "--manifest", corpus_path, "--split", "test", "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "path\tpredicted\tp_normal\tp_distressed"
    assert len(lines) == 1 + len(CorpusManifest.load(corpus_path).split("test"))


def test_sweep_over_lambda(corpus_path, tmp_path):
    assert run("sweep", "--param", "lambda", "--values", "0,1e-3", *train_args(corpus_path, tmp_path / "sweep")[1:]) == 0
    rows = (tmp_path / "sweep" / "sweep.tsv").read_text().splitlines()
    assert rows[0].startswith("value\tauc")
    assert len(rows) == 3
    assert (tmp_path / "sweep" / "lambda_0" / "best.pt").is_file()


def test_ingest_command(tmp_path):
    from corpus.images import write_image
    for name in ("normal", "crack"):
        for i in range(4):
            write_image(tmp_path / "tree" / name / f"{i}.png", np.full((8, 8), 100, np.uint8))
    assert run("ingest", "--root", tmp_path / "tree", "--split", "train=0.5,test=0.5",
               "--out", tmp_path / "m.tsv") == 0
    assert len(CorpusManifest.load(tmp_path / "m.tsv").split("train")) == 4


def test_overlay_without_confident_patches():
    boxes = plan_boxes(Strategy.IMAGE_PYRAMID, SMALL_PYRAMID)
    pixels = np.full((72, 96), 128, np.uint8)
    confidences = np.full((len(boxes), 2), 0.3)
    artifact = render_overlay(pixels, boxes, confidences, ["normal", "distressed"])
    assert artifact.tagged == []
    assert artifact.image.shape == (72, 96, 3)
    assert artifact.sidecar_text().count("\n") == len(boxes) + 1

    confidences[3, 1] = 0.9
    assert render_overlay(pixels, boxes, confidences, ["normal", "distressed"]).tagged == [3]


def test_overlay_opacity_follows_confidence():
    box = PatchBox(0, 0, 0, (0, 0, 24, 24), (0, 0, 24, 24))
    pixels = np.full((48, 48), 128, np.uint8)

    untouched = render_overlay(pixels, [box], np.array([[0.0, 0.0]]), ["normal", "distressed"])
    assert (untouched.image == 128).all()

    solid = render_overlay(pixels, [box], np.array([[0.0, 1.0]]), ["normal", "distressed"])
    np.testing.assert_array_equal(solid.image[:24, :24], np.broadcast_to(class_color(1), (24, 24, 3)))
    assert (solid.image[30:, :] == 128).all()

    faint = render_overlay(pixels, [box], np.array([[0.0, 0.25]]), ["normal", "distressed"])
    expected = np.rint(0.75 * 128 + 0.25 * np.asarray(class_color(1)))
    np.testing.assert_array_equal(faint.image[12, 12], expected)
    assert faint.tagged == []


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
