"""Dataset tests: noise schedule, augmentations, plans, splits, manifests,
and glyph-sheet ingestion."""

import hashlib
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teluguocr import dataset, synth
from teluguocr.dataset import (
    AugmentPlan,
    DatasetManifest,
    GlyphSample,
    ManifestRecord,
    add_noise,
    augment,
    displacement_field,
    elastic_deform,
    ingest_glyph_sheet,
    load_arrays,
    noise_variance,
    random_crop,
    read_manifest,
    rotate_aug,
    save_samples,
    split_dataset,
    write_manifest,
)
from teluguocr.errors import IngestError, ParameterError
from teluguocr.taxonomy import CompositeLabel

# ----------------------------------------------------------------- noise


def test_noise_variance_schedule():
    assert noise_variance(0) == pytest.approx(0.5)
    assert noise_variance(3) == pytest.approx(0.7)
    expected = [0.5, 0.5 + 2 / 30, 0.5 + 4 / 30, 0.7, 0.5 + 8 / 30, 0.5 + 10 / 30]
    for j, var in enumerate(expected):
        assert noise_variance(j) == pytest.approx(var)


def test_noise_variance_rejects_bad_level():
    with pytest.raises(ParameterError):
        noise_variance(6)


@pytest.mark.parametrize("j", range(6))
def test_noise_residual_statistics(j):
    clean = np.full((1000, 1000), 0.5)
    noisy = add_noise(clean, j, seed=17, clip=False)
    residual = noisy - clean
    scale = dataset.NOISE_SCALE
    target = noise_variance(j) * scale
    assert residual.var() == pytest.approx(target, rel=0.02)
    assert abs(residual.mean()) <= 0.002


def test_noise_deterministic():
    clean = np.zeros((32, 32))
    np.testing.assert_array_equal(
        add_noise(clean, 2, seed=5, clip=False), add_noise(clean, 2, seed=5, clip=False)
    )


# ------------------------------------------------------------ rotate_aug


def test_rotate_aug_round_trip():
    rng = np.random.default_rng(2)
    patch = (rng.random((32, 32)) < 0.3).astype(np.uint8)
    back = rotate_aug(rotate_aug(patch, -2), 2)
    interior = np.abs(
        back[4:28, 4:28].astype(float) - patch[4:28, 4:28].astype(float)
    ).mean()
    assert interior <= 2 / 255 * 32  # binary flips stay rare


def test_rotate_aug_disk_invariant():
    yy, xx = np.meshgrid(np.arange(32), np.arange(32), indexing="ij")
    disk = (((yy - 15.5) ** 2 + (xx - 15.5) ** 2) <= 100).astype(np.uint8)
    for angle in (-6, -2, 2, 6):
        out = rotate_aug(disk, angle)
        assert out.shape == (32, 32)
        boundary = np.abs(out.astype(int) - disk.astype(int)).sum()
        assert boundary <= 0.15 * disk.sum()  # only boundary pixels may flip


def test_rotate_aug_tilts_vertical_bar():
    patch = np.zeros((32, 32), dtype=np.uint8)
    patch[:, 15:17] = 1
    out = rotate_aug(patch, 6)
    top_cols = np.nonzero(out[1])[0]
    bot_cols = np.nonzero(out[30])[0]
    expected = 2 * 14.5 * np.tan(np.deg2rad(6))
    assert abs(abs(top_cols.mean() - bot_cols.mean()) - expected) <= 1.5


# ----------------------------------------------------------- random_crop


def test_random_crop_zero_shift_identity():
    rng = np.random.default_rng(0)
    patch = (rng.random((32, 32)) < 0.4).astype(np.uint8)
    np.testing.assert_array_equal(random_crop(patch, 0, seed=3), patch)


def test_random_crop_deterministic():
    patch = np.eye(32, dtype=np.uint8)
    np.testing.assert_array_equal(random_crop(patch, 2, 9), random_crop(patch, 2, 9))


def test_random_crop_preserves_area_roughly():
    patch = np.zeros((32, 32), dtype=np.uint8)
    patch[8:24, 8:24] = 1
    out = random_crop(patch, 2, seed=1)
    assert out.shape == (32, 32)
    assert abs(out.sum() - patch.sum()) <= 0.2 * patch.sum()


# -------------------------------------------------------- elastic deform


def test_elastic_alpha_zero_identity():
    rng = np.random.default_rng(1)
    patch = (rng.random((32, 32)) < 0.4).astype(np.uint8)
    np.testing.assert_array_equal(elastic_deform(patch, 0.0, 4.0, seed=2), patch)


def test_elastic_displacement_bounded():
    for seed in range(5):
        dr, dc = displacement_field(3.0, 4.0, seed)
        assert np.abs(dr).max() <= 3.0 + 1e-9
        assert np.abs(dc).max() <= 3.0 + 1e-9


def test_elastic_deterministic():
    patch = np.eye(32, dtype=np.uint8)
    np.testing.assert_array_equal(
        elastic_deform(patch, 3.0, 4.0, 7), elastic_deform(patch, 3.0, 4.0, 7)
    )


# --------------------------------------------------------------- augment


def _sample(main=1, mod=0):
    patch = np.zeros((32, 32), dtype=np.uint8)
    patch[8:24, 8:24] = 1
    return GlyphSample(patch=patch, label=CompositeLabel(main, mod))


def test_augment_default_plan_yields_32():
    out = augment(_sample(), AugmentPlan(), seed=0)
    assert len(out) == 32
    assert all(s.patch.shape == (32, 32) for s in out)
    assert all(s.label == CompositeLabel(1, 0) for s in out)


def test_augment_empty_plan_passthrough():
    s = _sample()
    assert augment(s, AugmentPlan.empty(), seed=0) == [s]


def test_augment_same_seed_identical():
    a = augment(_sample(), AugmentPlan(), seed=5)
    b = augment(_sample(), AugmentPlan(), seed=5)
    hashes = lambda xs: [hashlib.sha256(s.patch.tobytes()).hexdigest() for s in xs]
    assert hashes(a) == hashes(b)


# ----------------------------------------------------------------- split


def _records(n_per_class, labels):
    recs = []
    for lb in labels:
        for k in range(n_per_class):
            recs.append(
                ManifestRecord(
                    path=f"{lb.main_id}-{lb.modifier_id}-{k}.png",
                    label=lb,
                    split="train",
                    provenance={},
                )
            )
    return recs


def test_split_exact_stratification():
    labels = [CompositeLabel(m, 0) for m in range(4)]
    manifest = split_dataset(_records(100, labels), (0.7, 0.1, 0.2), seed=0)
    for lb in labels:
        per = [r for r in manifest.records if r.label == lb]
        counts = {s: sum(r.split == s for r in per) for s in ("train", "val", "test")}
        assert counts == {"train": 70, "val": 10, "test": 20}


def test_split_deterministic():
    labels = [CompositeLabel(m, 0) for m in range(3)]
    a = split_dataset(_records(10, labels), seed=4)
    b = split_dataset(_records(10, labels), seed=4)
    assert a.records == b.records


def test_split_tiny_class_warns_all_train():
    with pytest.warns(UserWarning):
        manifest = split_dataset(_records(2, [CompositeLabel(0, 0)]))
    assert all(r.split == "train" for r in manifest.records)


def test_split_default_fraction_matches_published_ratio():
    # 6,757,044 / (6,757,044 + 972,309 + 1,934,190) ~= 0.699
    total = 6_757_044 + 972_309 + 1_934_190
    assert 6_757_044 / total == pytest.approx(dataset.DEFAULT_FRACTIONS[0], abs=0.01)


@given(st.integers(3, 40), st.integers(0, 100))
@settings(max_examples=30, deadline=None)
def test_split_partition_property(n, seed):
    labels = [CompositeLabel(0, 0)]
    manifest = split_dataset(_records(n, labels), seed=seed)
    paths = [r.path for r in manifest.records]
    assert sorted(paths) == sorted(r.path for r in _records(n, labels))
    counts = manifest.counts()
    assert sum(counts.values()) == n
    assert counts["train"] >= counts["test"] >= 0


# -------------------------------------------------------------- manifest


def test_manifest_round_trip(tmp_path):
    labels = [CompositeLabel(m, v) for m in range(2) for v in range(2)]
    manifest = split_dataset(_records(5, labels), seed=1)
    path = tmp_path / "manifest.jsonl"
    write_manifest(manifest, path)
    again = read_manifest(path)
    assert again.records == manifest.records


def test_save_samples_content_addressed(tmp_path):
    samples = [_sample(main=m) for m in range(3)]
    recs = save_samples(samples, tmp_path)
    assert len(recs) == 3
    for rec in recs:
        assert os.path.exists(rec.path)
    # identical content maps to the identical file
    again = save_samples(samples, tmp_path)
    assert [r.path for r in again] == [r.path for r in recs]


def test_load_arrays_round_trip(tmp_path):
    samples = [_sample(main=m, mod=m % 2) for m in range(4)]
    recs = save_samples(samples, tmp_path)
    manifest = DatasetManifest(records=recs)
    x, y = load_arrays(manifest, "train", "main")
    assert x.shape == (4, 1, 32, 32)
    assert sorted(y.tolist()) == [0, 1, 2, 3]
    _, ym = load_arrays(manifest, "train", "modifier")
    assert sorted(ym.tolist()) == [0, 0, 1, 1]


# ------------------------------------------------------------- ingestion


def test_ingest_single_row(taxonomy):
    row = [CompositeLabel(m, 0) for m in (0, 5, 10, 15, 20)]
    sheet = synth.render_sheet([row], taxonomy)
    samples = ingest_glyph_sheet(sheet, [row])
    assert len(samples) == 5
    assert [s.label for s in samples] == row


def test_ingest_count_mismatch_names_row(taxonomy):
    row = [CompositeLabel(m, 0) for m in (0, 5, 10)]
    sheet = synth.render_sheet([row], taxonomy)
    with pytest.raises(IngestError, match="row 0"):
        ingest_glyph_sheet(sheet, [row + [CompositeLabel(30, 0)]])


def test_ingest_full_base_set(taxonomy):
    rows = [
        [CompositeLabel(m, 0) for m in range(start, start + 13)]
        for start in (0, 13, 26, 39)
    ]
    sheet = synth.render_sheet(rows, taxonomy)
    samples = ingest_glyph_sheet(sheet, rows)
    assert len(samples) == 52
    assert {s.label.main_id for s in samples} == set(range(52))
    for s in samples:
        assert s.patch.shape == (32, 32)
        assert s.patch.sum() > 0
