"""Deterministic synthetic glyph rendering.

Real font rendering is an external step; the engine only consumes images.
For desk-scale corpora, tests, and demos this module draws a distinct
procedural shape per main character (seeded polyline strokes) and a
smaller mark per modifier, placed right/above/below its base the way
gunintham and vattu marks sit around Telugu characters.
"""

from __future__ import annotations

import numpy as np

from . import imgcore, segment
from .taxonomy import CompositeLabel, Taxonomy

BASE_SIZE = 20
MOD_H, MOD_W = 9, 12
ATTACH_GAP = 2          # rows between base and an above/below mark
RIGHT_OVERLAP = 4       # columns of bbox overlap for right-placed marks
GLYPH_GAP = 4
WORD_GAP = 24
LINE_GAP = 16
SHEET_GAP = 40

_MAIN_SEED = 0x5EED
_MOD_SEED = 0xAB1E


def _draw_polyline(canvas: np.ndarray, points: np.ndarray, thickness: int = 2) -> None:
    h, w = canvas.shape
    for (r0, c0), (r1, c1) in zip(points, points[1:]):
        steps = int(max(abs(r1 - r0), abs(c1 - c0)) * 2 + 1)
        ts = np.linspace(0.0, 1.0, steps)
        rs = np.rint(r0 + ts * (r1 - r0)).astype(int)
        cs = np.rint(c0 + ts * (c1 - c0)).astype(int)
        for dr in range(thickness):
            for dc in range(thickness):
                rr = np.clip(rs + dr, 0, h - 1)
                cc = np.clip(cs + dc, 0, w - 1)
                canvas[rr, cc] = 1


def main_prototype(main_id: int, size: int = BASE_SIZE) -> np.ndarray:
    """Connected stroke pattern unique to a main-character id.

    Seeds are retried deterministically until the shape has enough ink
    and extent to survive segmentation-size thresholds.
    """
    for attempt in range(64):
        rng = np.random.default_rng((_MAIN_SEED + main_id) * 64 + attempt)
        canvas = np.zeros((size, size), dtype=np.uint8)
        pts = rng.integers(2, size - 3, size=(6, 2)).astype(float)
        pts[0] = (size / 2, size / 2)  # anchor through the center
        _draw_polyline(canvas, pts, thickness=2)
        ink = _crop_to_ink(canvas)
        if ink.sum() >= 60 and min(ink.shape) >= 10:
            return canvas
    return canvas


def modifier_prototype(modifier_id: int, h: int = MOD_H, w: int = MOD_W) -> np.ndarray:
    for attempt in range(64):
        rng = np.random.default_rng((_MOD_SEED + modifier_id) * 64 + attempt)
        canvas = np.zeros((h, w), dtype=np.uint8)
        pts = rng.integers(0, (h - 2, w - 2), size=(4, 2)).astype(float)
        _draw_polyline(canvas, pts, thickness=2)
        ink = _crop_to_ink(canvas)
        if ink.sum() >= 40 and min(ink.shape) >= 5:
            return canvas
    return canvas


def _crop_to_ink(mask: np.ndarray) -> np.ndarray:
    rows = np.any(mask, axis=1)
    cols = np.any(mask, axis=0)
    r0, r1 = np.argmax(rows), len(rows) - np.argmax(rows[::-1])
    c0, c1 = np.argmax(cols), len(cols) - np.argmax(cols[::-1])
    return mask[r0:r1, c0:c1]


def glyph_mask(label: CompositeLabel, taxonomy: Taxonomy) -> np.ndarray:
    """Binary mask of one glyph cluster (base plus placed modifier),
    cropped to its ink."""
    base = _crop_to_ink(main_prototype(label.main_id))
    placement = taxonomy.modifier(label.modifier_id).placement
    if placement == "none":
        return base
    mark = _crop_to_ink(modifier_prototype(label.modifier_id))
    bh, bw = base.shape
    mh, mw = mark.shape
    if placement == "right":
        overlap = min(RIGHT_OVERLAP, bw - 1, mw)
        h = max(bh, mh)
        w = bw + mw - overlap
        out = np.zeros((h, w), dtype=np.uint8)
        out[:bh, :bw] |= base
        top = max(0, (bh - mh) // 2)
        out[top : top + mh, bw - overlap :] |= mark
        return _crop_to_ink(out)
    left = max(0, (bw - mw) // 2)
    width = max(bw, left + mw)
    if placement == "above":
        out = np.zeros((mh + ATTACH_GAP + bh, width), dtype=np.uint8)
        out[:mh, left : left + mw] |= mark
        out[mh + ATTACH_GAP : mh + ATTACH_GAP + bh, :bw] |= base
    else:  # below
        out = np.zeros((bh + ATTACH_GAP + mh, width), dtype=np.uint8)
        out[:bh, :bw] |= base
        out[bh + ATTACH_GAP :, left : left + mw] |= mark
    return _crop_to_ink(out)


def glyph_patch(label: CompositeLabel, taxonomy: Taxonomy, size: int = 32) -> np.ndarray:
    """32x32 normalized patch of a clean rendered glyph."""
    mask = glyph_mask(label, taxonomy)
    h, w = mask.shape
    side = max(h, w)
    pad_r, pad_c = side - h, side - w
    square = np.pad(
        mask.astype(np.float64),
        ((pad_r // 2, pad_r - pad_r // 2), (pad_c // 2, pad_c - pad_c // 2)),
    )
    if side == size:
        return (square > 0.5).astype(np.uint8)
    return (segment.resize_bilinear(square, size, size) > 0.5).astype(np.uint8)


def render_word_mask(labels: list[CompositeLabel], taxonomy: Taxonomy, gap: int = GLYPH_GAP) -> np.ndarray:
    masks = [glyph_mask(lb, taxonomy) for lb in labels]
    height = max(m.shape[0] for m in masks)
    width = sum(m.shape[1] for m in masks) + gap * (len(masks) - 1)
    out = np.zeros((height, width), dtype=np.uint8)
    col = 0
    for m in masks:
        top = (height - m.shape[0]) // 2
        out[top : top + m.shape[0], col : col + m.shape[1]] |= m
        col += m.shape[1] + gap
    return out


def render_page(
    lines: list[list[list[CompositeLabel]]],
    taxonomy: Taxonomy,
    margin: int = 24,
    word_gap: int = WORD_GAP,
    line_gap: int = LINE_GAP,
    skew: float = 0.0,
) -> np.ndarray:
    """Grayscale page (dark text on white) from lines of words of labels."""
    line_masks = []
    for words in lines:
        word_masks = [render_word_mask(w, taxonomy) for w in words]
        height = max(m.shape[0] for m in word_masks)
        width = sum(m.shape[1] for m in word_masks) + word_gap * (len(word_masks) - 1)
        line_img = np.zeros((height, width), dtype=np.uint8)
        col = 0
        for m in word_masks:
            top = (height - m.shape[0]) // 2
            line_img[top : top + m.shape[0], col : col + m.shape[1]] |= m
            col += m.shape[1] + word_gap
        line_masks.append(line_img)
    page_w = max(m.shape[1] for m in line_masks) + 2 * margin
    page_h = sum(m.shape[0] for m in line_masks) + line_gap * (len(line_masks) - 1) + 2 * margin
    mask = np.zeros((page_h, page_w), dtype=np.uint8)
    row = margin
    for m in line_masks:
        mask[row : row + m.shape[0], margin : margin + m.shape[1]] |= m
        row += m.shape[0] + line_gap
    page = np.where(mask != 0, 0, 255).astype(np.uint8)
    if skew != 0.0:
        page = imgcore.rotate(page, skew)
    return page


def render_sheet(rows: list[list[CompositeLabel]], taxonomy: Taxonomy) -> np.ndarray:
    """Glyph sheet: one labeled sequence per row, glyphs widely spaced so
    each one segments as its own word."""
    return render_page(
        [[[lb] for lb in row] for row in rows],
        taxonomy,
        word_gap=SHEET_GAP,
        line_gap=24,
    )
