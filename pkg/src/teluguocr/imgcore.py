"""Low-level image operations.

Conventions used throughout the engine:

* a grayscale raster is a 2-D ``uint8`` array, row-major, values 0..255;
* an RGB raster is an ``(H, W, 3)`` ``uint8`` array;
* a binary image is a 2-D ``uint8`` array with values in {0, 1} where
  1 marks foreground (text, the dark class);
* a structuring element is a 2-D ``bool`` array with odd side lengths,
  origin at the center.

All functions are pure: inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import DimensionError, NoContentError, ParameterError, ImageDecodeError

# BT.601 luma weights for RGB -> grayscale.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class Component:
    """One 8- or 4-connected group of foreground pixels."""

    id: int
    pixels: np.ndarray  # (N, 2) array of (row, col), raster order
    bbox: tuple[int, int, int, int]  # (top, left, bottom, right), inclusive
    area: int

    @property
    def width(self) -> int:
        return self.bbox[3] - self.bbox[1] + 1

    @property
    def height(self) -> int:
        return self.bbox[2] - self.bbox[0] + 1


def box_element(size: int = 3) -> np.ndarray:
    """Square all-ones structuring element."""
    if size < 1 or size % 2 == 0:
        raise ParameterError(f"structuring element size must be odd >= 1, got {size}")
    return np.ones((size, size), dtype=bool)


def bar_element(height: int, width: int) -> np.ndarray:
    """Rectangular all-ones structuring element (odd sides)."""
    if height % 2 == 0 or width % 2 == 0 or height < 1 or width < 1:
        raise ParameterError(f"bar element sides must be odd, got {height}x{width}")
    return np.ones((height, width), dtype=bool)


def _check_2d(img: np.ndarray) -> None:
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise DimensionError(f"expected non-empty 2-D image, got shape {img.shape}")


def to_grayscale(rgb: np.ndarray) -> np.ndarray:
    """BT.601 luma conversion, per-pixel round-to-nearest."""
    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.shape[0] < 1 or rgb.shape[1] < 1:
        raise DimensionError(f"expected (H, W, 3) RGB raster, got shape {rgb.shape}")
    r, g, b = LUMA_WEIGHTS
    luma = r * rgb[..., 0].astype(np.float64) + g * rgb[..., 1] + b * rgb[..., 2]
    return np.floor(luma + 0.5).astype(np.uint8)


def otsu_threshold(img: np.ndarray) -> tuple[int, np.ndarray]:
    """Global threshold maximizing between-class variance.

    Candidate thresholds t in 0..255 split pixels into the dark class
    {p < t} and the light class {p >= t}; the dark class is foreground.
    Ties are broken toward the smallest maximizing threshold.  A constant
    image yields (that constant, all-background).
    """
    _check_2d(img)
    if img.min() == img.max():
        return int(img.min()), np.zeros(img.shape, dtype=np.uint8)
    hist = np.bincount(img.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    # w0(t), s0(t): count and intensity sum of pixels < t
    w0 = np.concatenate(([0.0], np.cumsum(hist)))[:256]
    s0 = np.concatenate(([0.0], np.cumsum(hist * np.arange(256))))[:256]
    w1 = total - w0
    s1 = (hist * np.arange(256)).sum() - s0
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = np.where(w0 > 0, s0 / w0, 0.0)
        mu1 = np.where(w1 > 0, s1 / w1, 0.0)
    var_between = w0 * w1 * (mu0 - mu1) ** 2
    t = int(np.argmax(var_between))  # argmax returns first (smallest) maximizer
    out = (img < t).astype(np.uint8)
    return t, out


def _pad_radius(se: np.ndarray) -> tuple[int, int]:
    if se.ndim != 2 or se.shape[0] % 2 == 0 or se.shape[1] % 2 == 0:
        raise ParameterError(f"structuring element must be 2-D with odd sides, got {se.shape}")
    return se.shape[0] // 2, se.shape[1] // 2


def dilate(img: np.ndarray, se: np.ndarray) -> np.ndarray:
    """Binary dilation; pixels outside the image are background."""
    _check_2d(img)
    rr, rc = _pad_radius(se)
    padded = np.pad(img.astype(bool), ((rr, rr), (rc, rc)))
    h, w = img.shape
    out = np.zeros((h, w), dtype=bool)
    for dr, dc in np.argwhere(se):
        # reflect the element so out[p] = OR img[p - (offset - origin)]
        sr, sc = 2 * rr - dr, 2 * rc - dc
        out |= padded[sr : sr + h, sc : sc + w]
    return out.astype(np.uint8)


def erode(img: np.ndarray, se: np.ndarray) -> np.ndarray:
    """Binary erosion; pixels outside the image are background."""
    _check_2d(img)
    rr, rc = _pad_radius(se)
    padded = np.pad(img.astype(bool), ((rr, rr), (rc, rc)))
    h, w = img.shape
    out = np.ones((h, w), dtype=bool)
    for dr, dc in np.argwhere(se):
        out &= padded[dr : dr + h, dc : dc + w]
    return out.astype(np.uint8)


def morphological_close(img: np.ndarray, se: np.ndarray) -> np.ndarray:
    """Dilation followed by erosion.

    The dilation is evaluated on an enlarged canvas so that closing is
    extensive (output is a superset of the input) even at the border.
    """
    _check_2d(img)
    rr, rc = _pad_radius(se)
    big = np.pad(img, ((rr, rr), (rc, rc)))
    closed = erode(dilate(big, se), se)
    h, w = img.shape
    return closed[rr : rr + h, rc : rc + w]


def mode_filter(img: np.ndarray, window: int = 3) -> np.ndarray:
    """Per-pixel majority vote over a window x window neighborhood.

    Border is padded with background; a tied vote keeps the original pixel.
    """
    _check_2d(img)
    if window < 3 or window % 2 == 0:
        raise ParameterError(f"window must be odd >= 3, got {window}")
    r = window // 2
    padded = np.pad(img.astype(np.int32), r)
    # sliding-window sum via 2-D cumulative sums
    csum = np.pad(padded, ((1, 0), (1, 0))).cumsum(axis=0).cumsum(axis=1)
    h, w = img.shape
    n = window
    counts = (
        csum[n:, n:][:h, :w]
        - csum[:-n, n:][:h, :w]
        - csum[n:, :-n][:h, :w]
        + csum[:-n, :-n][:h, :w]
    )
    half = (window * window) / 2.0
    out = np.where(counts > half, 1, np.where(counts < half, 0, img)).astype(np.uint8)
    return out


def binarize(img: np.ndarray, close_se: np.ndarray | None = None, mode_window: int = 3) -> np.ndarray:
    """Full binarization chain: Otsu, closing of the Otsu output, pixelwise
    OR of the two, then a mode (majority) filter."""
    _check_2d(img)
    _, raw = otsu_threshold(img)
    se = close_se if close_se is not None else box_element(3)
    denoised = morphological_close(raw, se)
    merged = (denoised | raw).astype(np.uint8)
    return mode_filter(merged, mode_window)


def hough_accumulator(
    img: np.ndarray, theta_res: float = 0.5
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Straight-line Hough accumulator over foreground pixels.

    Theta spans [0, 180) degrees at `theta_res`; rho bins are 1 px wide.
    Returns (accumulator[theta, rho], thetas_deg, rhos).
    """
    _check_2d(img)
    ys, xs = np.nonzero(img)
    if len(ys) == 0:
        raise NoContentError("image has no foreground pixels")
    thetas = np.arange(0.0, 180.0, theta_res)
    rad = np.deg2rad(thetas)
    diag = int(np.ceil(np.hypot(*img.shape)))
    rhos = np.arange(-diag, diag + 1)
    cos, sin = np.cos(rad), np.sin(rad)
    n_theta, n_rho = len(thetas), len(rhos)
    acc = np.zeros((n_theta, n_rho), dtype=np.int64)
    # chunk foreground pixels to bound the (pixels x angles) temporary
    chunk = max(1, 2_000_000 // n_theta)
    for start in range(0, len(xs), chunk):
        x = xs[start : start + chunk, None].astype(np.float64)
        y = ys[start : start + chunk, None].astype(np.float64)
        rho = x * cos + y * sin
        idx = np.rint(rho).astype(np.int64) + diag
        flat = np.broadcast_to(np.arange(n_theta), idx.shape) * n_rho + idx
        acc += np.bincount(flat.ravel(), minlength=n_theta * n_rho).reshape(n_theta, n_rho)
    return acc, thetas, rhos


def hough_skew_angle(img: np.ndarray, theta_res: float = 0.5) -> float:
    """Dominant text-line skew in degrees, in (-90, 90].

    Scores each angle by the concentration (sum of squares) of its rho
    column in the Hough accumulator, so the strongest family of parallel
    lines wins; a horizontal text baseline scores at theta = 90.
    """
    acc, thetas, _ = hough_accumulator(img, theta_res)
    score = (acc.astype(np.float64) ** 2).sum(axis=1)
    theta_peak = thetas[int(np.argmax(score))]
    skew = 90.0 - theta_peak
    if skew <= -90.0:
        skew += 180.0
    elif skew > 90.0:
        skew -= 180.0
    return float(skew)


def _rotate_float(data: np.ndarray, angle: float, fill: float) -> np.ndarray:
    """Rotate a float image about its center, bilinear, expanded canvas."""
    h, w = data.shape
    if angle % 360.0 == 0.0:
        return data.copy()
    rad = np.deg2rad(angle)
    c, s = np.cos(rad), np.sin(rad)
    new_w = int(np.ceil(abs(w * c) + abs(h * s)))
    new_h = int(np.ceil(abs(w * s) + abs(h * c)))
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    ncy, ncx = (new_h - 1) / 2.0, (new_w - 1) / 2.0
    rows, cols = np.meshgrid(np.arange(new_h), np.arange(new_w), indexing="ij")
    # inverse map: output coords back into input coords
    dx = cols - ncx
    dy = rows - ncy
    src_x = c * dx - s * dy + cx
    src_y = s * dx + c * dy + cy
    return _bilinear_sample(data, src_y, src_x, fill)


def _bilinear_sample(data: np.ndarray, ys: np.ndarray, xs: np.ndarray, fill: float) -> np.ndarray:
    h, w = data.shape
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    fx = xs - x0
    fy = ys - y0
    out = np.full(ys.shape, float(fill))
    valid = (xs >= -0.5) & (xs <= w - 0.5) & (ys >= -0.5) & (ys <= h - 0.5)

    def at(yy, xx):
        yyc = np.clip(yy, 0, h - 1)
        xxc = np.clip(xx, 0, w - 1)
        v = data[yyc, xxc].astype(np.float64)
        inside = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
        return np.where(inside, v, float(fill))

    v00 = at(y0, x0)
    v01 = at(y0, x0 + 1)
    v10 = at(y0 + 1, x0)
    v11 = at(y0 + 1, x0 + 1)
    interp = (
        v00 * (1 - fy) * (1 - fx)
        + v01 * (1 - fy) * fx
        + v10 * fy * (1 - fx)
        + v11 * fy * fx
    )
    out[valid] = interp[valid]
    return out


def rotate(img: np.ndarray, angle: float, fill: int = 255) -> np.ndarray:
    """Rotate a grayscale raster about its center (bilinear, white fill).

    The output canvas is sized to contain the whole rotated input; angle 0
    is the exact identity.
    """
    _check_2d(img)
    if not np.isfinite(angle):
        raise ParameterError(f"angle must be finite, got {angle}")
    out = _rotate_float(img.astype(np.float64), angle, float(fill))
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def rotate_binary(img: np.ndarray, angle: float) -> np.ndarray:
    """Rotate a binary image via its grayscale embedding, re-threshold 0.5."""
    _check_2d(img)
    if not np.isfinite(angle):
        raise ParameterError(f"angle must be finite, got {angle}")
    out = _rotate_float(img.astype(np.float64), angle, 0.0)
    return (out > 0.5).astype(np.uint8)


class _UnionFind:
    __slots__ = ("parent",)

    def __init__(self) -> None:
        self.parent: list[int] = []

    def make(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, a: int) -> int:
        p = self.parent
        root = a
        while p[root] != root:
            root = p[root]
        while p[a] != root:
            p[a], a = root, p[a]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if rb < ra:  # keep the earlier (raster-first) root
            ra, rb = rb, ra
        self.parent[rb] = ra
        return ra


def connected_components(img: np.ndarray, connectivity: int = 8) -> list[Component]:
    """Label maximal connected foreground sets.

    Components are numbered 0.. in raster-scan order of their first pixel;
    output is deterministic.
    """
    _check_2d(img)
    if connectivity not in (4, 8):
        raise ParameterError(f"connectivity must be 4 or 8, got {connectivity}")
    h, w = img.shape
    fg = np.argwhere(img != 0)
    if len(fg) == 0:
        return []
    labels = np.full((h, w), -1, dtype=np.int64)
    uf = _UnionFind()
    if connectivity == 4:
        offsets = ((-1, 0), (0, -1))
    else:
        offsets = ((-1, -1), (-1, 0), (-1, 1), (0, -1))
    for r, c in fg:
        best = -1
        for dr, dc in offsets:
            nr, nc = r + dr, c + dc
            if 0 <= nr < h and 0 <= nc < w and labels[nr, nc] >= 0:
                if best < 0:
                    best = labels[nr, nc]
                else:
                    best = uf.union(best, labels[nr, nc])
        if best < 0:
            best = uf.make()
        else:
            best = uf.find(best)
        labels[r, c] = best
    # resolve roots and renumber by first-pixel raster order
    root_to_id: dict[int, int] = {}
    buckets: list[list[tuple[int, int]]] = []
    for r, c in fg:
        root = uf.find(labels[r, c])
        cid = root_to_id.get(root)
        if cid is None:
            cid = len(buckets)
            root_to_id[root] = cid
            buckets.append([])
        buckets[cid].append((int(r), int(c)))
    comps = []
    for cid, pix in enumerate(buckets):
        arr = np.array(pix, dtype=np.int64)
        top, left = arr.min(axis=0)
        bottom, right = arr.max(axis=0)
        comps.append(
            Component(
                id=cid,
                pixels=arr,
                bbox=(int(top), int(left), int(bottom), int(right)),
                area=len(pix),
            )
        )
    return comps


def read_image(path_or_bytes) -> np.ndarray:
    """Read PNG/PGM/PPM from a path or raw bytes.

    Grayscale sources return an (H, W) uint8 array; color sources return
    (H, W, 3).
    """
    import io

    try:
        if isinstance(path_or_bytes, (bytes, bytearray)):
            im = Image.open(io.BytesIO(path_or_bytes))
        else:
            im = Image.open(path_or_bytes)
        im.load()
    except Exception as exc:
        raise ImageDecodeError(f"undecodable image: {exc}") from exc
    if im.mode in ("L", "1", "I;16", "I"):
        return np.asarray(im.convert("L"), dtype=np.uint8)
    return np.asarray(im.convert("RGB"), dtype=np.uint8)


def write_image(path, img: np.ndarray) -> None:
    """Write a grayscale or RGB raster as PNG or PGM (by extension)."""
    if img.ndim == 2:
        Image.fromarray(img, mode="L").save(path)
    elif img.ndim == 3 and img.shape[2] == 3:
        Image.fromarray(img, mode="RGB").save(path)
    else:
        raise DimensionError(f"cannot write image of shape {img.shape}")


def binary_to_raster(img: np.ndarray) -> np.ndarray:
    """Render a binary image as dark-on-light grayscale."""
    return np.where(img != 0, 0, 255).astype(np.uint8)
