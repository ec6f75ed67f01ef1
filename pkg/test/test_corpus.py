#!/usr/bin/env python3
"""
Tests for manifests, ingestion, normal-image synthesis, the synthetic corpus
generator and the crack/normal corpus builder
"""

import logging
import math
import sys

import cv2
import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from core.errors import ConfigError, IngestionError, ShapeError, SynthesisError
from corpus.crack500 import half_split, paired_crack_images, prepare_crack500_pdd
from corpus.images import read_image, write_image
from corpus.ingest import ingest, parse_split_ratios, split_counts
from corpus.inpaint import MaskedCrackImage, mask_path_for, synthesize_normal
from corpus.manifest import CorpusManifest, ManifestEntry, class_map_for
from corpus.synthetic import (
    MAX_DISTRESS_FRACTION,
    SYNTHETIC_CLASS_NAMES,
    generate_synthetic_corpus,
    generate_synthetic_image,
    synthetic_class_names,
    synthetic_mask_path,
)


# -- manifests ---------------------------------------------------------------

def test_class_map_puts_normal_first():
    assert class_map_for(["transverse", "normal", "alligator"]) == {"normal": 0, "alligator": 1, "transverse": 2}
    assert class_map_for(["b", "a"]) == {"a": 0, "b": 1}


def test_manifest_round_trip(small_corpus, tmp_path):
    path = small_corpus.save(tmp_path / "copy" / "manifest.tsv")
    loaded = CorpusManifest.load(path)
    assert loaded.checksum == small_corpus.checksum
    assert loaded.entries == small_corpus.entries
    assert loaded.class_map == small_corpus.class_map
    assert loaded.absolute_path(loaded.entries[0]).is_file()


def test_manifest_checksum_tamper(small_corpus, tmp_path):
    path = small_corpus.save(tmp_path / "manifest.tsv")
    text = path.read_text().replace("\ttrain\n", "\ttest\n", 1)
    path.write_text(text)
    with pytest.raises(ConfigError, match="checksum"):
        CorpusManifest.load(path)


def test_manifest_missing_paths(tmp_path):
    manifest = CorpusManifest([ManifestEntry("normal/a.png", "normal", "train")], {"normal": 0, "crack": 1}, tmp_path)
    path = manifest.save(tmp_path / "manifest.tsv")
    with pytest.raises(ConfigError):
        CorpusManifest.load(path)
    assert len(CorpusManifest.load(path, verify_paths=False)) == 1


def test_manifest_keeps_paths_starting_with_hash(tmp_path):
    entries = [ManifestEntry("#odd.png", "crack", "train"), ManifestEntry("normal/a.png", "normal", "test"),
               ManifestEntry("# notes.png", "crack", "test")]
    manifest = CorpusManifest(entries, {"normal": 0, "crack": 1}, tmp_path, seed=4)
    loaded = CorpusManifest.load(manifest.save(tmp_path / "manifest.tsv"), verify_paths=False)
    assert loaded.entries == entries
    assert loaded.checksum == manifest.checksum
    with pytest.raises(ConfigError):
        CorpusManifest([ManifestEntry("# seed", "crack", "train")], {"normal": 0, "crack": 1})


def test_manifest_invariants():
    with pytest.raises(ConfigError):
        CorpusManifest([], {"normal": 0, "crack": 2})
    with pytest.raises(ConfigError):
        CorpusManifest([ManifestEntry("x.png", "crack", "train")], {"normal": 0})


# -- ingestion ---------------------------------------------------------------

def _class_tree(root, classes, per_class):
    rng = np.random.default_rng(0)
    for name in classes:
        for i in range(per_class):
            write_image(root / name / f"{name}_{i:03d}.png", rng.integers(0, 255, (8, 8), dtype=np.uint8))
    return root


def test_split_counts():
    assert split_counts(100, {"train": 0.17, "test": 0.83}) == [("train", 17), ("test", 83)]
    assert split_counts(10, {"train": 1.0, "test": 0.0}) == [("train", 10), ("test", 0)]
    assert sum(c for _, c in split_counts(7, {"a": 1, "b": 1, "c": 1})) == 7


def test_parse_split_ratios():
    assert parse_split_ratios("train=0.17,test=0.83") == {"train": 0.17, "test": 0.83}
    with pytest.raises(IngestionError):
        parse_split_ratios("train:0.5")


def test_ingest_proportions(tmp_path):
    classes = ["normal"] + list(SYNTHETIC_CLASS_NAMES[1:])
    root = _class_tree(tmp_path / "tree", classes, 100)
    manifest = ingest(root, {"train": 0.17, "test": 0.83}, seed=3, out_path=tmp_path / "m.tsv", check_readable=False)
    assert manifest.class_map["normal"] == 0
    assert len(manifest.split("train")) == 8 * 17
    assert len(manifest.split("test")) == 8 * 83
    assert manifest.counts_by_class("train") == {name: 17 for name in manifest.class_names}
    assert CorpusManifest.load(tmp_path / "m.tsv").checksum == manifest.checksum


def test_ingest_all_train(tmp_path):
    root = _class_tree(tmp_path / "tree", ["normal", "crack"], 5)
    manifest = ingest(root, {"train": 1.0, "test": 0.0}, seed=0)
    assert manifest.split_tags == ["train"]


def test_ingest_is_deterministic(tmp_path):
    root = _class_tree(tmp_path / "tree", ["normal", "crack"], 12)
    first = ingest(root, seed=9)
    assert ingest(root, seed=9).checksum == first.checksum
    assert ingest(root, seed=10).checksum != first.checksum


def test_ingest_empty_class(tmp_path):
    root = _class_tree(tmp_path / "tree", ["normal"], 3)
    (root / "crack").mkdir()
    with pytest.raises(IngestionError):
        ingest(root)


def test_ingest_quarantines_unreadable(tmp_path):
    root = _class_tree(tmp_path / "tree", ["normal", "crack"], 3)
    (root / "crack" / "broken.png").write_bytes(b"not an image")
    manifest = ingest(root, seed=0, out_path=tmp_path / "m.tsv", workers=2)
    assert len(manifest) == 6
    assert (tmp_path / "m.quarantine.txt").read_text().strip() == "crack/broken.png"


# -- normal-image synthesis -------------------------------------------------

def test_empty_mask_is_identity():
    pixels = np.random.default_rng(0).integers(0, 255, (20, 30), dtype=np.uint8)
    out = synthesize_normal(MaskedCrackImage(pixels, np.zeros((20, 30), bool)))
    np.testing.assert_array_equal(out, pixels)


def test_single_pixel_on_constant_gray():
    pixels = np.full((9, 9), 128, dtype=np.uint8)
    pixels[4, 4] = 10
    mask = np.zeros((9, 9), bool)
    mask[4, 4] = True
    assert synthesize_normal(MaskedCrackImage(pixels, mask))[4, 4] == 128


def test_ties_prefer_smallest_row_then_column():
    pixels = np.zeros((3, 3), dtype=np.uint8)
    pixels[0, 1], pixels[1, 0], pixels[1, 2], pixels[2, 1] = 10, 20, 30, 40
    mask = np.zeros((3, 3), bool)
    mask[1, 1] = True
    assert synthesize_normal(MaskedCrackImage(pixels, mask))[1, 1] == 10


def test_full_mask_is_rejected():
    with pytest.raises(SynthesisError):
        synthesize_normal(MaskedCrackImage(np.zeros((4, 4), np.uint8), np.ones((4, 4), bool)))


def test_mask_shape_mismatch():
    with pytest.raises(ShapeError):
        MaskedCrackImage(np.zeros((4, 4), np.uint8), np.zeros((4, 5), bool))


def test_unmasked_pixels_unchanged_and_idempotent():
    rng = np.random.default_rng(1)
    pixels = rng.integers(0, 255, (40, 50), dtype=np.uint8)
    mask = rng.random((40, 50)) < 0.2
    once = synthesize_normal(MaskedCrackImage(pixels, mask))
    np.testing.assert_array_equal(once[~mask], pixels[~mask])
    np.testing.assert_array_equal(synthesize_normal(MaskedCrackImage(once, mask)), once)


def test_erased_line_matches_original_texture():
    rng = np.random.default_rng(2)
    original = np.clip(128 + 30 * gaussian_filter(rng.normal(size=(200, 300)), 4), 0, 255).astype(np.uint8)
    mask = np.zeros(original.shape, np.uint8)
    cv2.line(mask, (20, 40), (280, 170), 1, 10)
    mask = mask.astype(bool)
    cracked = original.copy()
    cracked[mask] = 30
    restored = synthesize_normal(MaskedCrackImage(cracked, mask))
    error = np.abs(restored[mask].astype(float) - original[mask].astype(float)).mean()
    assert error <= 5.0


# -- synthetic corpus ---------------------------------------------------------

def test_synthetic_class_names():
    assert synthetic_class_names(2) == ["normal", "alligator"]
    assert len(synthetic_class_names(10)) == 10
    with pytest.raises(ConfigError):
        synthetic_class_names(1)


def test_synthetic_corpus_counts(tmp_path):
    manifest = generate_synthetic_corpus(tmp_path, n_per_class=10, num_classes=2, dims=(96, 72), seed=0)
    assert len(manifest) == 20
    assert manifest.counts_by_class() == {"normal": 10, "alligator": 10}
    assert len(manifest.split("train")) == 10
    assert CorpusManifest.load(tmp_path / "manifest.tsv").checksum == manifest.checksum


def test_synthetic_corpus_is_bitwise_reproducible(tmp_path):
    first = generate_synthetic_corpus(tmp_path / "a", 3, 3, dims=(96, 72), seed=5)
    second = generate_synthetic_corpus(tmp_path / "b", 3, 3, dims=(96, 72), seed=5)
    assert first.checksum == second.checksum
    for a, b in zip(first.entries, second.entries):
        assert first.absolute_path(a).read_bytes() == second.absolute_path(b).read_bytes()


@pytest.mark.parametrize("name", SYNTHETIC_CLASS_NAMES[1:])
def test_distress_fraction_bounds(name):
    for index in range(3):
        pixels, mask = generate_synthetic_image(name, (400, 300), np.random.default_rng([1, index]))
        assert pixels.shape == (300, 400)
        assert 0.0 < mask.mean() <= MAX_DISTRESS_FRACTION


def test_normal_images_have_no_mask(small_corpus):
    pixels, mask = generate_synthetic_image("normal", (96, 72), np.random.default_rng(0))
    assert not mask.any()
    entry = small_corpus.split("train")[0]
    assert synthetic_mask_path(small_corpus, entry) is None
    distressed = next(e for e in small_corpus.entries if e.class_name != "normal")
    assert synthetic_mask_path(small_corpus, distressed).is_file()


# -- crack / normal corpus ----------------------------------------------------

def _crack_dir(root, count, dims=(40, 30), missing_masks=0):
    rng = np.random.default_rng(0)
    for i in range(count):
        pixels = rng.integers(90, 160, (dims[1], dims[0]), dtype=np.uint8)
        mask = np.zeros((dims[1], dims[0]), np.uint8)
        y = int(rng.integers(5, dims[1] - 5))
        cv2.line(mask, (0, y), (dims[0] - 1, y + 2), 255, 2)
        pixels[mask > 0] = 20
        write_image(root / f"crack_{i:04d}.jpg", pixels)
        if i >= missing_masks:
            write_image(mask_path_for(root / f"crack_{i:04d}.jpg"), mask)
    return root


def test_mask_pairing(tmp_path):
    crack_dir = _crack_dir(tmp_path / "cracks", 3, missing_masks=1)
    assert mask_path_for(crack_dir / "crack_0001.jpg") == crack_dir / "crack_0001_mask.png"
    write_image(mask_path_for(crack_dir / "crack_0000.jpg", ".jpg"), np.zeros((30, 40), np.uint8))
    pairs = paired_crack_images(crack_dir)
    assert [image.name for image, _ in pairs] == ["crack_0000.jpg", "crack_0001.jpg", "crack_0002.jpg"]
    assert pairs[0][1].name == "crack_0000_mask.jpg"
    assert pairs[1][1].name == "crack_0001_mask.png"


def test_half_split():
    tags = half_split(7, np.random.default_rng(0))
    assert tags.count("train") == 4
    assert tags.count("test") == 3


def test_crack_corpus_counts(tmp_path):
    crack_dir = _crack_dir(tmp_path / "cracks", 494)
    manifests = prepare_crack500_pdd(crack_dir, 286, seed=1, out_dir=tmp_path / "out", dims=(40, 30), workers=4)
    assert len(manifests) == 5
    for replica, manifest in enumerate(manifests):
        assert len(manifest) == 780
        assert manifest.counts_by_class() == {"normal": 286, "crack": 494}
        assert len(manifest.split("train")) == math.ceil(780 / 2)
        assert (tmp_path / "out" / f"manifest_r{replica}.tsv").is_file()
    assert manifests[0].checksum != manifests[1].checksum
    normal = manifests[0].split("train")[0]
    assert read_image(manifests[0].absolute_path(normal)).shape == (30, 40)


def test_crack_corpus_skips_missing_masks(tmp_path, caplog):
    crack_dir = _crack_dir(tmp_path / "cracks", 6, missing_masks=2)
    with caplog.at_level(logging.WARNING):
        manifests = prepare_crack500_pdd(crack_dir, 2, seed=0, out_dir=tmp_path / "out", replicas=1, dims=(40, 30))
    assert manifests[0].counts_by_class() == {"normal": 2, "crack": 4}
    assert "No mask" in caplog.text


def test_crack_corpus_without_normals(tmp_path, caplog):
    crack_dir = _crack_dir(tmp_path / "cracks", 4)
    with caplog.at_level(logging.WARNING):
        manifests = prepare_crack500_pdd(crack_dir, 0, seed=0, out_dir=tmp_path / "out", replicas=1, dims=(40, 30))
    assert len(manifests[0]) == 4
    assert not manifests[0].is_detection_ready()
    assert "cannot be used for detection" in caplog.text


def test_crack_corpus_rejects_too_many_normals(tmp_path):
    crack_dir = _crack_dir(tmp_path / "cracks", 3)
    with pytest.raises(ConfigError):
        prepare_crack500_pdd(crack_dir, 4, seed=0, out_dir=tmp_path / "out", dims=(40, 30))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
