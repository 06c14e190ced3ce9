"""Synthetic dataset construction.

Augmentations follow the training-data recipe: rotations from the fixed
angle set, additive Gaussian noise whose variance schedule is
0.5 + (J/10)*(2/3) for level J in 0..5, random crops, and elastic
deformations.  The schedule's variance is stated on an unspecified scale;
applied raw to [0, 1] intensities it would bury a 32x32 glyph, so it is
multiplied by `noise_scale` (default 0.08) before sampling.

Every operation is deterministic given its seed and preserves the label
and the 32x32 shape.
"""

from __future__ import annotations

import hashlib
import json
import os
import warnings
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.ndimage import gaussian_filter

from . import imgcore, segment
from .errors import IngestError, ParameterError
from .taxonomy import CompositeLabel

PATCH = 32
NOISE_SCALE = 0.08
ROTATION_SET = (-6, -2, 2, 6)
SPLITS = ("train", "val", "test")
DEFAULT_FRACTIONS = (0.7, 0.1, 0.2)


@dataclass(frozen=True)
class GlyphSample:
    patch: np.ndarray  # (32, 32) uint8 in {0, 1}
    label: CompositeLabel
    provenance: dict = field(default_factory=dict)


def noise_variance(j: int) -> float:
    """Variance schedule before noise_scale: 0.5 + (J/10)*(2/3)."""
    if j not in range(6):
        raise ParameterError(f"noise level J must be in 0..5, got {j}")
    return 0.5 + (j / 10.0) * (2.0 / 3.0)


def add_noise(
    patch: np.ndarray,
    j: int,
    seed: int,
    noise_scale: float = NOISE_SCALE,
    clip: bool = True,
) -> np.ndarray:
    """Add zero-mean Gaussian noise at schedule level J to a [0,1] patch."""
    sigma = np.sqrt(noise_variance(j) * noise_scale)
    rng = np.random.default_rng(seed)
    out = patch.astype(np.float64) + rng.normal(0.0, sigma, size=patch.shape)
    if clip:
        out = np.clip(out, 0.0, 1.0)
    return out


def _warp_same_canvas(patch: np.ndarray, src_rows: np.ndarray, src_cols: np.ndarray) -> np.ndarray:
    warped = imgcore._bilinear_sample(patch.astype(np.float64), src_rows, src_cols, 0.0)
    return (warped > 0.5).astype(np.uint8)


def rotate_aug(patch: np.ndarray, angle: int) -> np.ndarray:
    """Rotate a binary patch about its center on the same 32x32 canvas."""
    if angle not in ROTATION_SET:
        raise ParameterError(f"angle must be one of {ROTATION_SET}, got {angle}")
    h, w = patch.shape
    rad = np.deg2rad(angle)
    c, s = np.cos(rad), np.sin(rad)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    rows, cols = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    dx = cols - cx
    dy = rows - cy
    return _warp_same_canvas(patch, s * dx + c * dy + cy, c * dx - s * dy + cx)


def random_crop(patch: np.ndarray, max_shift: int, seed: int) -> np.ndarray:
    """Crop a seeded (32-s)x(32-s) window, s <= max_shift, rescale to 32."""
    if max_shift < 0 or max_shift > 4:
        raise ParameterError(f"max_shift must be in 0..4, got {max_shift}")
    if max_shift == 0:
        return patch.copy()
    rng = np.random.default_rng(seed)
    s = int(rng.integers(0, max_shift + 1))
    if s == 0:
        return patch.copy()
    dy = int(rng.integers(0, s + 1))
    dx = int(rng.integers(0, s + 1))
    window = patch[dy : dy + PATCH - s, dx : dx + PATCH - s].astype(np.float64)
    resized = segment.resize_bilinear(window, PATCH, PATCH)
    return (resized > 0.5).astype(np.uint8)


def elastic_deform(patch: np.ndarray, alpha: float, sigma: float, seed: int) -> np.ndarray:
    """Smoothed random displacement field, max magnitude alpha px."""
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    if alpha < 0:
        raise ParameterError(f"alpha must be non-negative, got {alpha}")
    if alpha == 0:
        return patch.copy()
    rng = np.random.default_rng(seed)
    h, w = patch.shape
    ddy = gaussian_filter(rng.uniform(-1, 1, (h, w)), sigma) * alpha
    ddx = gaussian_filter(rng.uniform(-1, 1, (h, w)), sigma) * alpha
    rows, cols = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    return _warp_same_canvas(patch, rows + ddy, cols + ddx)


def displacement_field(alpha: float, sigma: float, seed: int, shape=(PATCH, PATCH)):
    """The (dy, dx) field elastic_deform would apply (for inspection)."""
    rng = np.random.default_rng(seed)
    ddy = gaussian_filter(rng.uniform(-1, 1, shape), sigma) * alpha
    ddx = gaussian_filter(rng.uniform(-1, 1, shape), sigma) * alpha
    return ddy, ddx


@dataclass(frozen=True)
class AugmentPlan:
    rotations: tuple = ROTATION_SET
    noise_levels: tuple = (0, 1, 2, 3, 4, 5)
    n_elastic: int = 4
    n_crop: int = 4
    elastic_alpha: float = 3.0
    elastic_sigma: float = 4.0
    crop_max_shift: int = 2
    noise_scale: float = NOISE_SCALE

    @classmethod
    def empty(cls) -> "AugmentPlan":
        return cls(rotations=(), noise_levels=(), n_elastic=0, n_crop=0)

    def is_empty(self) -> bool:
        return not self.rotations and not self.noise_levels and self.n_elastic == 0 and self.n_crop == 0

    def variants_per_sample(self) -> int:
        return len(self.rotations) * len(self.noise_levels) + self.n_elastic + self.n_crop


def _variant_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def augment(sample: GlyphSample, plan: AugmentPlan, seed: int) -> list[GlyphSample]:
    """Expand one sample per the plan; default plan yields 4*6 + 4 + 4 = 32."""
    if plan.is_empty():
        return [sample]
    out: list[GlyphSample] = []
    idx = 0
    for angle in plan.rotations:
        rotated = rotate_aug(sample.patch, angle)
        for j in plan.noise_levels:
            s = _variant_seed(seed, idx)
            noisy = add_noise(rotated.astype(np.float64), j, s, plan.noise_scale)
            patch = (noisy > 0.5).astype(np.uint8)
            out.append(
                GlyphSample(
                    patch=patch,
                    label=sample.label,
                    provenance={**sample.provenance, "augment": "rotate+noise",
                                "angle": angle, "J": j, "seed": s},
                )
            )
            idx += 1
    for _ in range(plan.n_elastic):
        s = _variant_seed(seed, idx)
        patch = elastic_deform(sample.patch, plan.elastic_alpha, plan.elastic_sigma, s)
        out.append(
            GlyphSample(
                patch=patch,
                label=sample.label,
                provenance={**sample.provenance, "augment": "elastic",
                            "alpha": plan.elastic_alpha, "sigma": plan.elastic_sigma,
                            "seed": s},
            )
        )
        idx += 1
    for _ in range(plan.n_crop):
        s = _variant_seed(seed, idx)
        patch = random_crop(sample.patch, plan.crop_max_shift, s)
        out.append(
            GlyphSample(
                patch=patch,
                label=sample.label,
                provenance={**sample.provenance, "augment": "crop",
                            "max_shift": plan.crop_max_shift, "seed": s},
            )
        )
        idx += 1
    return out


@dataclass(frozen=True)
class ManifestRecord:
    path: str
    label: CompositeLabel
    split: str
    provenance: dict = field(default_factory=dict)


@dataclass
class DatasetManifest:
    records: list[ManifestRecord]
    taxonomy_path: str | None = None

    def counts(self) -> dict[str, int]:
        out = {s: 0 for s in SPLITS}
        for rec in self.records:
            out[rec.split] = out.get(rec.split, 0) + 1
        return out

    def subset(self, split: str) -> list[ManifestRecord]:
        return [r for r in self.records if r.split == split]


def split_dataset(
    samples: list[ManifestRecord],
    fractions: tuple[float, float, float] = DEFAULT_FRACTIONS,
    seed: int = 0,
    taxonomy_path: str | None = None,
) -> DatasetManifest:
    """Stratified-by-label deterministic split into train/val/test."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ParameterError(f"fractions must sum to 1, got {fractions}")
    by_class: dict[CompositeLabel, list[ManifestRecord]] = {}
    for rec in samples:
        by_class.setdefault(rec.label, []).append(rec)
    out: list[ManifestRecord] = []
    for label in sorted(by_class):
        recs = by_class[label]
        rng = np.random.default_rng(
            np.random.SeedSequence([seed, label.main_id, label.modifier_id])
        )
        order = rng.permutation(len(recs))
        if len(recs) < 3:
            warnings.warn(f"class {label} has {len(recs)} samples; all go to train")
            alloc = [len(recs), 0, 0]
        else:
            n = len(recs)
            exact = [f * n for f in fractions]
            alloc = [int(np.floor(e)) for e in exact]
            rema = sorted(
                range(3), key=lambda i: (-(exact[i] - alloc[i]), i)
            )
            for i in rema[: n - sum(alloc)]:
                alloc[i] += 1
        cursor = 0
        for split, count in zip(SPLITS, alloc):
            for k in order[cursor : cursor + count]:
                rec = recs[int(k)]
                out.append(ManifestRecord(rec.path, rec.label, split, rec.provenance))
            cursor += count
    out.sort(key=lambda r: (r.label, r.path))
    return DatasetManifest(records=out, taxonomy_path=taxonomy_path)


def write_manifest(manifest: DatasetManifest, path) -> None:
    """JSON-lines manifest, one {path, main_id, modifier_id, split, provenance}
    record per line, preceded by one header line."""
    with open(path, "w", encoding="utf-8") as fh:
        header = {"taxonomy": manifest.taxonomy_path, "counts": manifest.counts()}
        fh.write(json.dumps({"_header": header}) + "\n")
        for rec in manifest.records:
            fh.write(
                json.dumps(
                    {
                        "path": rec.path,
                        "main_id": rec.label.main_id,
                        "modifier_id": rec.label.modifier_id,
                        "split": rec.split,
                        "provenance": rec.provenance,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def read_manifest(path) -> DatasetManifest:
    records = []
    taxonomy_path = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "_header" in obj:
                taxonomy_path = obj["_header"].get("taxonomy")
                continue
            records.append(
                ManifestRecord(
                    path=obj["path"],
                    label=CompositeLabel(obj["main_id"], obj["modifier_id"]),
                    split=obj["split"],
                    provenance=obj.get("provenance", {}),
                )
            )
    return DatasetManifest(records=records, taxonomy_path=taxonomy_path)


def save_samples(samples: list[GlyphSample], out_dir) -> list[ManifestRecord]:
    """Write one PNG per sample, content-addressed by hash prefix."""
    os.makedirs(out_dir, exist_ok=True)
    records = []
    for sample in samples:
        payload = sample.patch.tobytes() + repr(sorted(sample.provenance.items())).encode()
        digest = hashlib.sha256(payload).hexdigest()
        sub = os.path.join(out_dir, digest[:2])
        os.makedirs(sub, exist_ok=True)
        path = os.path.join(sub, digest[2:18] + ".png")
        if not os.path.exists(path):
            imgcore.write_image(path, (sample.patch * 255).astype(np.uint8))
        records.append(
            ManifestRecord(path=path, label=sample.label, split="train",
                           provenance=sample.provenance)
        )
    return records


def load_arrays(
    manifest: DatasetManifest, split: str, target: str
) -> tuple[np.ndarray, np.ndarray]:
    """Load a split as (N,1,32,32) float32 patches and int labels.

    `target` selects the label projection: 'main' or 'modifier'.
    """
    if target not in ("main", "modifier"):
        raise ParameterError(f"target must be 'main' or 'modifier', got {target}")
    recs = manifest.subset(split)
    x = np.zeros((len(recs), 1, PATCH, PATCH), dtype=np.float32)
    y = np.zeros(len(recs), dtype=np.int64)
    for i, rec in enumerate(recs):
        img = imgcore.read_image(rec.path)
        x[i, 0] = (img > 127).astype(np.float32)
        y[i] = rec.label.main_id if target == "main" else rec.label.modifier_id
    return x, y


def ingest_glyph_sheet(
    sheet: np.ndarray,
    row_labels: list[list[CompositeLabel]],
    strict: bool = True,
) -> list[GlyphSample]:
    """Harvest labeled 32x32 samples from a rendered glyph sheet.

    The sheet goes through the page segmentation chain (binarize, word
    detection, character segmentation, normalization); glyphs are matched
    to labels in reading order, row by row.  A row whose glyph count does
    not match its label count raises IngestError (or is skipped with a
    warning when strict=False).
    """
    binary = imgcore.binarize(sheet)
    words = segment.detect_words(sheet)
    n_lines = max((w.line_index for w in words), default=-1) + 1
    if n_lines != len(row_labels):
        raise IngestError(
            f"sheet has {n_lines} rows but {len(row_labels)} label rows were given"
        )
    samples: list[GlyphSample] = []
    for li, labels in enumerate(row_labels):
        patches = []
        for wb in sorted(
            (w for w in words if w.line_index == li), key=lambda w: w.order_index
        ):
            top, left, bottom, right = wb.bbox
            crop = binary[top : bottom + 1, left : right + 1]
            glyphs, comps = segment.segment_characters(crop)
            for g in glyphs:
                patches.append(segment.normalize_glyph(crop, g, comps))
        if len(patches) != len(labels):
            msg = f"row {li}: segmented {len(patches)} glyphs for {len(labels)} labels"
            if strict:
                raise IngestError(msg)
            warnings.warn(msg + "; row skipped")
            continue
        for ci, (patch, label) in enumerate(zip(patches, labels)):
            samples.append(
                GlyphSample(
                    patch=patch,
                    label=label,
                    provenance={"source": "sheet", "row": li, "col": ci},
                )
            )
    return samples
