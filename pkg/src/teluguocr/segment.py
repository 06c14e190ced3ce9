"""Page-to-word and word-to-glyph segmentation.

Word detection runs MSER over the deskewed grayscale page and merges
nearby character regions with a dilation; character extraction runs
connected components over a binarized word, drops minor blobs, and groups
detached modifier marks (vattus, dheergas) with their base component by
bounding-box overlap.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import imgcore
from .errors import NoContentError, ParameterError
from .imgcore import Component

# engineering defaults, tuned on synthetic pages
MSER_DELTA = 5
MSER_MIN_AREA = 30
MSER_MAX_VARIATION = 0.5
BLOB_MIN_AREA = 8
BLOB_MIN_SIDE = 3
OVERLAP_RATIO = 0.3
GAP_MAX = 4
LINE_OVERLAP = 0.5
WORD_MERGE_VERTICAL_REACH = 5


@dataclass(frozen=True)
class MserRegion:
    pixels: np.ndarray  # (N, 2) rows/cols
    stability: float
    bbox: tuple[int, int, int, int]

    @property
    def area(self) -> int:
        return len(self.pixels)


@dataclass(frozen=True)
class WordBox:
    bbox: tuple[int, int, int, int]  # page coordinates, inclusive
    line_index: int
    order_index: int


@dataclass(frozen=True)
class GlyphBox:
    bbox: tuple[int, int, int, int]  # word coordinates, inclusive
    members: tuple[int, ...]         # Component ids, ascending
    base_id: int                     # largest-area member
    order_index: int


class _CompRecord:
    __slots__ = ("seed", "birth", "size", "levels", "sizes", "death")

    def __init__(self, seed: int, birth: int):
        self.seed = seed
        self.birth = birth
        self.size = 0
        self.levels: list[int] = []
        self.sizes: list[int] = []
        self.death = 256

    def size_at(self, level: int) -> int:
        i = bisect_right(self.levels, level) - 1
        return self.sizes[i] if i >= 0 else 0


def mser_regions(
    img: np.ndarray,
    delta: int = MSER_DELTA,
    min_area: int = MSER_MIN_AREA,
    max_area: int | None = None,
    max_variation: float = MSER_MAX_VARIATION,
) -> list[MserRegion]:
    """Maximally stable extremal regions of the dark-on-light sweep.

    Components of the thresholded image (pixels <= level) are tracked with
    union-find as the level rises; a region is emitted at each local
    stability optimum where the relative area growth across +-delta levels
    stays within max_variation, subject to the area bounds.
    """
    imgcore._check_2d(img)
    h, w = img.shape
    n = h * w
    if max_area is None:
        # 1% of the page, floored so glyph-scale regions survive small
        # pages, but never more than half the image (excludes the root
        # component that swallows the background)
        max_area = max(min_area + 1, min(max(n // 100, 4000), n // 2))
    if delta < 1 or min_area < 1 or min_area >= max_area or max_variation <= 0:
        raise ParameterError(
            f"bad MSER parameters delta={delta} min_area={min_area} "
            f"max_area={max_area} max_variation={max_variation}"
        )
    flat = img.ravel()
    order = np.argsort(flat, kind="stable")
    values = flat[order]
    parent = [-1] * n  # -1 = not yet active
    comp_of: dict[int, int] = {}
    comps: list[_CompRecord] = []

    def find(a: int) -> int:
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    touched: set[int] = set()
    pos = 0
    total = len(order)
    while pos < total:
        level = int(values[pos])
        end = pos
        while end < total and values[end] == level:
            end += 1
        for k in range(pos, end):
            p = int(order[k])
            parent[p] = p
            ci = len(comps)
            comps.append(_CompRecord(p, level))
            comps[ci].size = 1
            comp_of[p] = ci
            touched.add(ci)
            r, c = divmod(p, w)
            for dr, dc in ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)):
                nr, nc = r + dr, c + dc
                if 0 <= nr < h and 0 <= nc < w:
                    q = nr * w + nc
                    if parent[q] >= 0:
                        ra, rb = find(p), find(q)
                        if ra == rb:
                            continue
                        ca, cb = comp_of[ra], comp_of[rb]
                        if comps[ca].size < comps[cb].size:
                            ra, rb = rb, ra
                            ca, cb = cb, ca
                        parent[rb] = ra
                        comps[ca].size += comps[cb].size
                        comps[cb].death = level
                        touched.discard(cb)
                        touched.add(ca)
                        comp_of.pop(rb, None)
                        comp_of[ra] = ca
        for ci in touched:
            comps[ci].levels.append(level)
            comps[ci].sizes.append(comps[ci].size)
        touched.clear()
        pos = end

    regions: list[MserRegion] = []
    thresholded: dict[int, np.ndarray] = {}
    for comp in comps:
        lo, hi = comp.birth + delta, comp.death - delta - 1
        if hi < lo:
            continue
        candidates = []
        for v in range(lo, hi + 1):
            size_v = comp.size_at(v)
            if size_v < min_area or size_v > max_area:
                continue
            var = (comp.size_at(v + delta) - comp.size_at(v - delta)) / size_v
            if var <= max_variation:
                candidates.append((v, var))
        if not candidates:
            continue
        # one region per maximal run of stable levels, at its best variation
        runs: list[list[tuple[int, float]]] = [[candidates[0]]]
        for prev, cur in zip(candidates, candidates[1:]):
            if cur[0] == prev[0] + 1:
                runs[-1].append(cur)
            else:
                runs.append([cur])
        for run in runs:
            v_star, var_star = min(run, key=lambda t: (t[1], t[0]))
            pix = _flood_region(img, comp.seed, v_star, thresholded)
            if not (min_area <= len(pix) <= max_area):
                continue
            arr = np.array(pix, dtype=np.int64)
            top, left = arr.min(axis=0)
            bottom, right = arr.max(axis=0)
            regions.append(
                MserRegion(
                    pixels=arr,
                    stability=float(var_star),
                    bbox=(int(top), int(left), int(bottom), int(right)),
                )
            )
    return regions


def _flood_region(img: np.ndarray, seed: int, level: int, cache: dict) -> list[tuple[int, int]]:
    h, w = img.shape
    mask = cache.get(level)
    if mask is None:
        mask = img <= level
        cache[level] = mask
    sr, sc = divmod(seed, w)
    seen = {(sr, sc)}
    queue = deque([(sr, sc)])
    pix = []
    while queue:
        r, c = queue.popleft()
        pix.append((r, c))
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                nr, nc = r + dr, c + dc
                if 0 <= nr < h and 0 <= nc < w and (nr, nc) not in seen and mask[nr, nc]:
                    seen.add((nr, nc))
                    queue.append((nr, nc))
    return pix


def _cluster_lines(boxes: list[tuple[int, int, int, int]]) -> list[list[int]]:
    """Group box indices into text lines by >= 50% vertical bbox overlap."""
    order = sorted(range(len(boxes)), key=lambda i: (boxes[i][0], boxes[i][1]))
    lines: list[list[int]] = []
    spans: list[tuple[int, int]] = []  # running (top, bottom) per line
    for i in order:
        top, _, bottom, _ = boxes[i]
        height = bottom - top + 1
        placed = False
        for li, (lt, lb) in enumerate(spans):
            overlap = min(bottom, lb) - max(top, lt) + 1
            if overlap >= LINE_OVERLAP * min(height, lb - lt + 1):
                lines[li].append(i)
                spans[li] = (min(lt, top), max(lb, bottom))
                placed = True
                break
        if not placed:
            lines.append([i])
            spans.append((top, bottom))
    keyed = sorted(zip(spans, lines), key=lambda t: t[0][0])
    # short mark-bearing boxes can fall below the 50% pairwise bar while
    # still sitting inside a line; merge clusters whose row spans overlap
    merged: list[tuple[tuple[int, int], list[int]]] = []
    for span, line in keyed:
        if merged and span[0] <= merged[-1][0][1]:
            pspan, pline = merged[-1]
            merged[-1] = ((pspan[0], max(pspan[1], span[1])), pline + line)
        else:
            merged.append((span, line))
    out = []
    for (_, line) in merged:
        out.append(sorted(line, key=lambda i: (boxes[i][1], boxes[i][0])))
    return out


def estimate_stroke_width(components: list[Component]) -> int:
    if not components:
        return 3
    widths = sorted(c.width for c in components)
    est = widths[len(widths) // 2] / 6.0
    return int(min(15, max(3, round(est))))


def detect_words(page: np.ndarray, mser_kwargs: dict | None = None) -> list[WordBox]:
    """MSER regions -> binary mask -> dilation merge -> word components.

    Returns word boxes in reading order (lines top-to-bottom, words
    left-to-right); a blank page yields an empty list.
    """
    regions = mser_regions(page, **(mser_kwargs or {}))
    if not regions:
        return []
    mask = np.zeros(page.shape, dtype=np.uint8)
    for reg in regions:
        mask[reg.pixels[:, 0], reg.pixels[:, 1]] = 1
    comps = imgcore.connected_components(mask, 8)
    stroke = estimate_stroke_width(comps)
    # mostly-horizontal bar; the vertical reach keeps detached
    # below/above-base modifier marks inside their word component while
    # staying well under typical line spacing.  The +1 on the horizontal
    # reach absorbs the extra pixel of spread that rotation interpolation
    # can put between adjacent characters.
    se = imgcore.bar_element(2 * WORD_MERGE_VERTICAL_REACH + 1, 2 * (stroke + 1) + 1)
    merged = imgcore.dilate(mask, se)
    word_comps = imgcore.connected_components(merged, 8)
    label_img = np.full(page.shape, -1, dtype=np.int64)
    for comp in word_comps:
        label_img[comp.pixels[:, 0], comp.pixels[:, 1]] = comp.id
    boxes = []
    for comp in word_comps:
        # tight bbox over undilated mask pixels belonging to this word
        inside = np.argwhere(mask.astype(bool) & (label_img == comp.id))
        if len(inside) == 0:
            continue
        top, left = inside.min(axis=0)
        bottom, right = inside.max(axis=0)
        boxes.append((int(top), int(left), int(bottom), int(right)))
    lines = _cluster_lines(boxes)
    words = []
    idx = 0
    for li, line in enumerate(lines):
        for bi in line:
            words.append(WordBox(bbox=boxes[bi], line_index=li, order_index=idx))
            idx += 1
    return words


def group_modifiers(
    components: list[Component],
    overlap_ratio: float = OVERLAP_RATIO,
    gap_max: int = GAP_MAX,
) -> list[GlyphBox]:
    """Merge base and modifier components by bbox overlap.

    Two components join when their horizontal overlap reaches
    overlap_ratio of the narrower one, or when they overlap horizontally
    at all and their vertical gap is at most gap_max.  Merging is closed
    transitively; the result is independent of input order.
    """
    if not components:
        return []
    comps = sorted(components, key=lambda c: (c.bbox, c.id))
    k = len(comps)
    parent = list(range(k))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(k):
        t1, l1, b1, r1 = comps[i].bbox
        for j in range(i + 1, k):
            t2, l2, b2, r2 = comps[j].bbox
            h_overlap = min(r1, r2) - max(l1, l2) + 1
            if h_overlap <= 0:
                continue
            v_gap = max(t1, t2) - min(b1, b2) - 1
            min_w = min(r1 - l1, r2 - l2) + 1
            if h_overlap >= overlap_ratio * min_w or v_gap <= gap_max:
                ra, rb = find(i), find(j)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)

    groups: dict[int, list[Component]] = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(comps[i])
    boxes = []
    for members in groups.values():
        tops, lefts, bottoms, rights = zip(*(m.bbox for m in members))
        base = max(members, key=lambda m: (m.area, -m.id))
        boxes.append(
            GlyphBox(
                bbox=(min(tops), min(lefts), max(bottoms), max(rights)),
                members=tuple(sorted(m.id for m in members)),
                base_id=base.id,
                order_index=-1,
            )
        )
    boxes.sort(key=lambda g: (g.bbox[1], g.bbox[0]))
    return [
        GlyphBox(bbox=g.bbox, members=g.members, base_id=g.base_id, order_index=i)
        for i, g in enumerate(boxes)
    ]


def segment_characters(
    word: np.ndarray,
    blob_min_area: int = BLOB_MIN_AREA,
    blob_min_side: int = BLOB_MIN_SIDE,
    overlap_ratio: float = OVERLAP_RATIO,
    gap_max: int = GAP_MAX,
) -> tuple[list[GlyphBox], list[Component]]:
    """Character segmentation of one binarized word.

    Returns the glyph boxes in left-to-right order together with the
    component list they index into (blobs below the size thresholds are
    already removed).
    """
    comps = imgcore.connected_components(word, 8)
    kept = [
        c
        for c in comps
        if c.area >= blob_min_area and max(c.width, c.height) >= blob_min_side
    ]
    return group_modifiers(kept, overlap_ratio, gap_max), kept


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize of a float image (pixel-center alignment)."""
    h, w = img.shape
    rows = (np.arange(out_h) + 0.5) * h / out_h - 0.5
    cols = (np.arange(out_w) + 0.5) * w / out_w - 0.5
    ys, xs = np.meshgrid(rows, cols, indexing="ij")
    return imgcore._bilinear_sample(img.astype(np.float64), ys, xs, 0.0)


def normalize_glyph(
    word: np.ndarray,
    box: GlyphBox,
    components: list[Component] | None = None,
    size: int = 32,
) -> np.ndarray:
    """Crop a glyph's member pixels, pad to square, resample to 32x32.

    Only member-component pixels are kept, so overlapping neighbors do not
    bleed into the patch.  Output values are in {0, 1}.
    """
    top, left, bottom, right = box.bbox
    h, w = bottom - top + 1, right - left + 1
    if h < 1 or w < 1 or top < 0 or left < 0 or bottom >= word.shape[0] or right >= word.shape[1]:
        raise ParameterError(f"glyph box {box.bbox} outside word bounds {word.shape}")
    crop = np.zeros((h, w), dtype=np.float64)
    if components is not None:
        by_id = {c.id: c for c in components}
        any_pix = False
        for mid in box.members:
            comp = by_id.get(mid)
            if comp is None:
                continue
            crop[comp.pixels[:, 0] - top, comp.pixels[:, 1] - left] = 1.0
            any_pix = True
        if not any_pix:
            raise NoContentError("glyph box has no member pixels")
    else:
        crop = word[top : bottom + 1, left : right + 1].astype(np.float64)
        if crop.sum() == 0:
            raise NoContentError("glyph box is empty")
    side = max(h, w)
    pad_r = side - h
    pad_c = side - w
    square = np.pad(
        crop,
        ((pad_r // 2, pad_r - pad_r // 2), (pad_c // 2, pad_c - pad_c // 2)),
    )
    if side == size:
        return (square > 0.5).astype(np.uint8)
    resized = resize_bilinear(square, size, size)
    return (resized > 0.5).astype(np.uint8)


def segmentation_report(page: np.ndarray) -> tuple[dict, list]:
    """Segment a grayscale page and return the debug structure.

    The dict follows {words: [{bbox, glyphs: [{bbox, components}]}]} with
    glyph boxes in word coordinates; the second return value carries
    (WordBox, glyph boxes, components, word crop) tuples for callers that
    need the rasters.
    """
    binary = imgcore.binarize(page)
    words = detect_words(page)
    entries = []
    detail = []
    for wb in words:
        top, left, bottom, right = wb.bbox
        crop = binary[top : bottom + 1, left : right + 1]
        glyphs, comps = segment_characters(crop)
        entries.append(
            {
                "bbox": list(wb.bbox),
                "glyphs": [
                    {"bbox": list(g.bbox), "components": list(g.members)} for g in glyphs
                ],
            }
        )
        detail.append((wb, glyphs, comps, crop))
    return {"words": entries}, detail


def _draw_rect(img: np.ndarray, bbox, value: int) -> None:
    top, left, bottom, right = bbox
    img[top, left : right + 1] = value
    img[bottom, left : right + 1] = value
    img[top : bottom + 1, left] = value
    img[top : bottom + 1, right] = value


def dump_debug(page: np.ndarray, out_dir) -> dict:
    """Write segmentation overlays (PNG) and box coordinates (JSON)."""
    import os

    report, detail = segmentation_report(page)
    overlay = np.stack([page] * 3, axis=-1).astype(np.uint8)
    for wb, glyphs, _, _ in detail:
        top, left, bottom, right = wb.bbox
        _draw_rect(overlay[..., 0], wb.bbox, 255)
        _draw_rect(overlay[..., 1], wb.bbox, 0)
        _draw_rect(overlay[..., 2], wb.bbox, 0)
        for g in glyphs:
            gb = (top + g.bbox[0], left + g.bbox[1], top + g.bbox[2], left + g.bbox[3])
            _draw_rect(overlay[..., 0], gb, 0)
            _draw_rect(overlay[..., 1], gb, 0)
            _draw_rect(overlay[..., 2], gb, 255)
    os.makedirs(out_dir, exist_ok=True)
    imgcore.write_image(os.path.join(out_dir, "segmentation.png"), overlay)
    with open(os.path.join(out_dir, "segmentation.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
    return report
