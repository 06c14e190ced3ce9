"""Segmentation tests: MSER regions, word detection, modifier grouping,
character segmentation, and glyph normalization."""

import json
import os

import numpy as np
import pytest

from teluguocr import imgcore, segment, synth
from teluguocr.imgcore import Component
from teluguocr.taxonomy import CompositeLabel

# ------------------------------------------------------------------ mser


def test_mser_solid_square():
    img = np.full((60, 60), 240, dtype=np.uint8)
    img[20:40, 20:40] = 15
    regions = segment.mser_regions(img)
    assert len(regions) == 1
    top, left, bottom, right = regions[0].bbox
    assert abs(top - 20) <= 1 and abs(left - 20) <= 1
    assert abs(bottom - 39) <= 1 and abs(right - 39) <= 1
    assert regions[0].stability >= 0


def test_mser_blank_page():
    assert segment.mser_regions(np.full((50, 50), 255, dtype=np.uint8)) == []


def test_mser_two_separated_squares():
    img = np.full((60, 120), 240, dtype=np.uint8)
    img[10:30, 10:30] = 20
    img[30:50, 80:100] = 20
    regions = segment.mser_regions(img)
    assert len(regions) == 2
    boxes = sorted(r.bbox for r in regions)
    for got, want in zip(boxes, [(10, 10, 29, 29), (30, 80, 49, 99)]):
        assert all(abs(g - w) <= 1 for g, w in zip(got, want))


def test_mser_pixels_are_connected_extremal():
    img = np.full((60, 60), 240, dtype=np.uint8)
    img[20:40, 20:40] = 15
    (region,) = segment.mser_regions(img)
    mask = np.zeros(img.shape, dtype=np.uint8)
    mask[region.pixels[:, 0], region.pixels[:, 1]] = 1
    assert len(imgcore.connected_components(mask, 8)) == 1


# ---------------------------------------------------------- detect_words


def test_detect_words_two_words(taxonomy):
    L = CompositeLabel
    page = synth.render_page([[[L(0, 0), L(1, 4)], [L(2, 16), L(3, 0)]]], taxonomy)
    words = segment.detect_words(page)
    assert len(words) == 2
    assert [w.order_index for w in words] == [0, 1]
    assert words[0].bbox[1] < words[1].bbox[1]
    # each word box must cover all its glyph ink, including detached marks
    binary = imgcore.binarize(page)
    covered = np.zeros_like(binary)
    for top, left, bottom, right in (w.bbox for w in words):
        covered[top : bottom + 1, left : right + 1] = 1
    assert not (binary & ~covered).any()


def test_detect_words_single_glyph(taxonomy):
    page = synth.render_page([[[CompositeLabel(7, 0)]]], taxonomy)
    assert len(segment.detect_words(page)) == 1


def test_detect_words_blank_page():
    assert segment.detect_words(np.full((40, 40), 255, dtype=np.uint8)) == []


def test_detect_words_reading_order_two_lines(taxonomy):
    L = CompositeLabel
    page = synth.render_page([[[L(0, 0), L(1, 0)]], [[L(2, 0), L(3, 0)]]], taxonomy)
    words = segment.detect_words(page)
    assert [w.line_index for w in words] == [0, 1]
    assert [w.order_index for w in words] == [0, 1]
    assert words[0].bbox[2] < words[1].bbox[0]  # line 1 fully above line 2


# ------------------------------------------------------- group_modifiers


def _comp(cid, top, left, bottom, right):
    rows, cols = np.meshgrid(
        np.arange(top, bottom + 1), np.arange(left, right + 1), indexing="ij"
    )
    pixels = np.stack([rows.ravel(), cols.ravel()], axis=1)
    return Component(id=cid, pixels=pixels, bbox=(top, left, bottom, right),
                     area=len(pixels))


def test_group_disjoint_components():
    comps = [_comp(0, 0, 0, 9, 9), _comp(1, 0, 30, 9, 39)]
    groups = segment.group_modifiers(comps)
    assert len(groups) == 2
    assert [g.members for g in groups] == [(0,), (1,)]


def test_group_half_overlap_merges():
    base = _comp(0, 0, 0, 9, 9)
    mark = _comp(1, 14, 5, 18, 14)  # 50% horizontal overlap with the base
    groups = segment.group_modifiers([base, mark])
    assert len(groups) == 1
    assert groups[0].members == (0, 1)
    assert groups[0].base_id == 0  # larger area is the base


def test_group_transitive_chain():
    a = _comp(0, 0, 0, 4, 9)
    b = _comp(1, 6, 6, 10, 15)   # overlaps a and c horizontally
    c = _comp(2, 12, 12, 16, 21)  # no horizontal overlap with a
    groups = segment.group_modifiers([a, b, c])
    assert len(groups) == 1
    assert groups[0].members == (0, 1, 2)


def test_group_small_gap_merges():
    base = _comp(0, 0, 0, 9, 9)
    mark = _comp(1, 12, 8, 15, 13)  # touches horizontally, vertical gap 2
    assert len(segment.group_modifiers([base, mark])) == 1


def test_group_orders_left_to_right():
    comps = [_comp(0, 0, 20, 9, 29), _comp(1, 0, 0, 9, 9)]
    groups = segment.group_modifiers(comps)
    assert [g.order_index for g in groups] == [0, 1]
    assert groups[0].bbox[1] < groups[1].bbox[1]


# ---------------------------------------------------- segment_characters


def test_segment_three_disjoint_glyphs():
    word = np.zeros((20, 50), dtype=np.uint8)
    word[5:15, 2:10] = 1
    word[5:15, 20:28] = 1
    word[5:15, 38:46] = 1
    glyphs, comps = segment.segment_characters(word)
    assert len(glyphs) == 3
    lefts = [g.bbox[1] for g in glyphs]
    assert lefts == sorted(lefts)


def test_segment_groups_detached_below_modifier(taxonomy):
    page = synth.render_page([[[CompositeLabel(0, 16)]]], taxonomy)
    binary = imgcore.binarize(page)
    (word,) = segment.detect_words(page)
    top, left, bottom, right = word.bbox
    glyphs, comps = segment.segment_characters(binary[top : bottom + 1, left : right + 1])
    assert len(glyphs) == 1
    assert len(glyphs[0].members) >= 2  # base plus detached vattu


def test_segment_drops_small_speck():
    word = np.zeros((20, 30), dtype=np.uint8)
    word[5:15, 2:10] = 1
    word[3, 25] = word[4, 25] = 1  # 2-px speck below the blob threshold
    glyphs, comps = segment.segment_characters(word)
    assert len(glyphs) == 1
    for g in glyphs:
        assert g.bbox[3] < 20  # speck is in no glyph box


def test_segment_partition_property(taxonomy):
    L = CompositeLabel
    page = synth.render_page([[[L(5, 1), L(9, 16), L(20, 4)]]], taxonomy)
    binary = imgcore.binarize(page)
    (word,) = segment.detect_words(page)
    top, left, bottom, right = word.bbox
    glyphs, comps = segment.segment_characters(binary[top : bottom + 1, left : right + 1])
    # every retained component belongs to exactly one glyph box
    seen = [cid for g in glyphs for cid in g.members]
    assert sorted(seen) == sorted(c.id for c in comps)
    assert len(seen) == len(set(seen))


# -------------------------------------------------------- normalization


def test_normalize_identity_crop():
    word = np.zeros((32, 32), dtype=np.uint8)
    word[4:28, 4:28] = 1
    glyphs, comps = segment.segment_characters(word)
    patch = segment.normalize_glyph(word, glyphs[0], comps)
    assert patch.shape == (32, 32)
    assert set(np.unique(patch)) <= {0, 1}


def test_normalize_downsampled_disk_stays_centered():
    word = np.zeros((64, 64), dtype=np.uint8)
    yy, xx = np.meshgrid(np.arange(64), np.arange(64), indexing="ij")
    word[(yy - 31.5) ** 2 + (xx - 31.5) ** 2 <= 28**2] = 1
    glyphs, comps = segment.segment_characters(word)
    patch = segment.normalize_glyph(word, glyphs[0], comps)
    assert patch.shape == (32, 32)
    rows, cols = np.nonzero(patch)
    assert abs(rows.mean() - 15.5) <= 1.0
    assert abs(cols.mean() - 15.5) <= 1.0


def test_normalize_tall_crop_keeps_aspect():
    word = np.zeros((30, 40), dtype=np.uint8)
    word[0:30, 15:25] = 1  # 3:1 tall bar
    glyphs, comps = segment.segment_characters(word)
    patch = segment.normalize_glyph(word, glyphs[0], comps)
    rows, cols = np.nonzero(patch)
    height = rows.max() - rows.min() + 1
    width = cols.max() - cols.min() + 1
    assert height / width == pytest.approx(3.0, rel=0.15)
    # content horizontally centered with equal padding
    assert abs((31 - cols.max()) - cols.min()) <= 1


def test_resize_bilinear_identity():
    rng = np.random.default_rng(0)
    img = rng.random((17, 23))
    np.testing.assert_allclose(segment.resize_bilinear(img, 17, 23), img, atol=1e-12)


# ------------------------------------------------------------- debugging


def test_dump_debug_writes_overlay_and_json(taxonomy, tmp_path):
    L = CompositeLabel
    page = synth.render_page([[[L(0, 0), L(1, 0)], [L(2, 0)]]], taxonomy)
    out = segment.dump_debug(page, tmp_path)
    png = os.path.join(tmp_path, "segmentation.png")
    js = os.path.join(tmp_path, "segmentation.json")
    assert os.path.exists(png) and os.path.exists(js)
    with open(js, encoding="utf-8") as fh:
        report = json.load(fh)
    assert len(report["words"]) == 2
    assert out == report
    assert all(w["glyphs"] for w in report["words"])
    overlay = imgcore.read_image(png)
    assert overlay.shape[:2] == page.shape
