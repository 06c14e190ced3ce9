"""End-to-end page OCR: deskew -> binarize -> words -> glyphs -> dual
classification -> text/HTML."""

from __future__ import annotations

import html as html_mod
import time
from dataclasses import dataclass, field

import numpy as np

from . import imgcore, segment
from .duoclf import DualModel, GlyphPrediction, compose_unicode
from .errors import ParameterError


@dataclass
class PipelineConfig:
    deskew: bool = True
    theta_res: float = 0.5
    reject_below: float | None = None  # confidence threshold, off by default
    mser_kwargs: dict = field(default_factory=dict)


@dataclass(frozen=True)
class GlyphResult:
    prediction: GlyphPrediction
    text: str
    bbox: tuple[int, int, int, int]  # page coordinates
    rejected: bool = False


@dataclass(frozen=True)
class WordResult:
    glyphs: tuple[GlyphResult, ...]
    bbox: tuple[int, int, int, int]

    @property
    def text(self) -> str:
        return "".join(g.text for g in self.glyphs)


@dataclass
class OcrResult:
    lines: list[list[WordResult]]
    skew_angle: float
    timing_ms: dict[str, float]

    @property
    def plain_text(self) -> str:
        return "\n".join(" ".join(w.text for w in line) for line in self.lines)

    def glyphs(self) -> list[GlyphResult]:
        return [g for line in self.lines for w in line for g in w.glyphs]

    def to_dict(self) -> dict:
        return {
            "skew": self.skew_angle,
            "lines": [
                {
                    "words": [
                        {
                            "text": w.text,
                            "bbox": list(w.bbox),
                            "main_conf": min(
                                (g.prediction.main_confidence for g in w.glyphs),
                                default=0.0,
                            ),
                            "mod_conf": min(
                                (g.prediction.modifier_confidence for g in w.glyphs),
                                default=0.0,
                            ),
                        }
                        for w in line
                    ]
                }
                for line in self.lines
            ],
            "timing_ms": self.timing_ms,
        }


def ocr_page(image: np.ndarray, model: DualModel, config: PipelineConfig | None = None) -> OcrResult:
    """Run the full pipeline on a decoded image (grayscale or RGB).

    An empty page yields an empty result rather than an error.
    """
    config = config or PipelineConfig()
    timing: dict[str, float] = {}
    t0 = time.perf_counter()
    gray = imgcore.to_grayscale(image) if image.ndim == 3 else image
    skew = 0.0
    if config.deskew:
        rough = imgcore.binarize(gray)
        if rough.any():
            skew = imgcore.hough_skew_angle(rough, config.theta_res)
            if skew != 0.0:
                gray = imgcore.rotate(gray, -skew)
    timing["deskew"] = (time.perf_counter() - t0) * 1000

    t0 = time.perf_counter()
    binary = imgcore.binarize(gray)
    timing["binarize"] = (time.perf_counter() - t0) * 1000

    t0 = time.perf_counter()
    words = segment.detect_words(gray, config.mser_kwargs) if binary.any() else []
    timing["words"] = (time.perf_counter() - t0) * 1000

    t0 = time.perf_counter()
    patches = []
    layout = []  # (word box, [glyph page bboxes])
    for wb in words:
        top, left, bottom, right = wb.bbox
        crop = binary[top : bottom + 1, left : right + 1]
        glyph_boxes, comps = segment.segment_characters(crop)
        page_boxes = []
        for g in glyph_boxes:
            patches.append(segment.normalize_glyph(crop, g, comps))
            page_boxes.append(
                (top + g.bbox[0], left + g.bbox[1], top + g.bbox[2], left + g.bbox[3])
            )
        layout.append((wb, page_boxes))
    timing["glyphs"] = (time.perf_counter() - t0) * 1000

    t0 = time.perf_counter()
    preds: list[GlyphPrediction] = []
    if patches:
        batch = np.stack(patches).astype(np.float32)[:, None, :, :]
        preds = model.classify_batch(batch)
    lines: dict[int, list[WordResult]] = {}
    cursor = 0
    for wb, page_boxes in layout:
        glyphs = []
        for bbox in page_boxes:
            pred = preds[cursor]
            cursor += 1
            conf = min(pred.main_confidence, pred.modifier_confidence)
            rejected = config.reject_below is not None and conf < config.reject_below
            text = "" if rejected else compose_unicode(pred.label, model.taxonomy)
            glyphs.append(GlyphResult(pred, text, bbox, rejected))
        lines.setdefault(wb.line_index, []).append(
            WordResult(glyphs=tuple(glyphs), bbox=wb.bbox)
        )
    timing["classify"] = (time.perf_counter() - t0) * 1000
    ordered = [lines[k] for k in sorted(lines)]
    return OcrResult(lines=ordered, skew_angle=float(skew), timing_ms=timing)


def render_html(result: OcrResult) -> str:
    """UTF-8 HTML: one paragraph per line, words space-separated, per-word
    confidences as data attributes."""
    parts = [
        "<!DOCTYPE html>",
        '<html><head><meta charset="utf-8"><title>OCR result</title></head><body>',
    ]
    for line in result.lines:
        spans = []
        for w in line:
            main_conf = min((g.prediction.main_confidence for g in w.glyphs), default=0.0)
            mod_conf = min((g.prediction.modifier_confidence for g in w.glyphs), default=0.0)
            spans.append(
                f'<span data-main-conf="{main_conf:.4f}" data-mod-conf="{mod_conf:.4f}">'
                f"{html_mod.escape(w.text)}</span>"
            )
        parts.append("<p>" + " ".join(spans) + "</p>")
    parts.append("</body></html>")
    return "\n".join(parts)


def parse_config_file(path) -> dict:
    """Optional key=value config file; '#' starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out
