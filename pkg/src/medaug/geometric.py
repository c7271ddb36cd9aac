"""Rotation, scaling, translation, shear and flip for images and masks.

Coordinates are (row, col) with row 0 at the top. Interpolating ops use
inverse mapping: for each output pixel find the source coordinate and
sample there. Mask variants sample nearest-neighbour so labels stay in
{0, 255}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import InvalidFactor, TargetTooLarge
from .raster import BinaryMask, ImageBuffer, clamp_round


@dataclass(frozen=True)
class GeometricParams:
    scale_factor: float = 1.2
    translate_dx: int = 20
    translate_dy: int = 30
    shear_k: float = 0.2
    fill_value: int = 0

    def __post_init__(self):
        _check_factor(self.scale_factor)
        if not 0 <= self.fill_value <= 255:
            raise ValueError(f"fill_value must be an 8-bit intensity, got {self.fill_value}")


def _check_factor(factor):
    if not (math.isfinite(factor) and factor > 0):
        raise InvalidFactor(f"scale factor must be finite and > 0, got {factor}")


def _round_half_away(v):
    """Round half away from zero without the ``x + 0.5`` precision trap."""
    a = np.abs(np.asarray(v, dtype=np.float64))
    fl = np.floor(a)
    return np.copysign(fl + ((a - fl) >= 0.5), v)


def scaled_dims(width: int, height: int, factor: float) -> tuple[int, int]:
    _check_factor(factor)
    return (max(1, int(_round_half_away(width * factor))),
            max(1, int(_round_half_away(height * factor))))


def _as_image(arr, like):
    return ImageBuffer(arr) if isinstance(like, ImageBuffer) else BinaryMask(arr)


def rotate90_cw(image):
    """Rotate 90 degrees clockwise; works for images and masks alike."""
    return _as_image(np.rot90(image.pixels, k=-1), image)


def flip_horizontal(image):
    return _as_image(image.pixels[:, ::-1], image)


def translate(image, dx: int, dy: int, fill: int = 0):
    """Shift content right by ``dx`` and down by ``dy``; vacated pixels get ``fill``.

    Masks always use fill 0 regardless of ``fill``.
    """
    src = image.pixels
    h, w = src.shape[:2]
    if isinstance(image, BinaryMask):
        fill = 0
    out = np.full_like(src, fill)
    dx, dy = int(dx), int(dy)
    if abs(dx) < w and abs(dy) < h:
        out[max(dy, 0):h + min(dy, 0), max(dx, 0):w + min(dx, 0)] = \
            src[max(-dy, 0):h + min(-dy, 0), max(-dx, 0):w + min(-dx, 0)]
    return _as_image(out, image)


def crop_center(image, target_w: int, target_h: int):
    h, w = image.pixels.shape[:2]
    if not (1 <= target_w <= w and 1 <= target_h <= h):
        raise TargetTooLarge(f"cannot crop {w}x{h} to {target_w}x{target_h}")
    top = (h - target_h) // 2
    left = (w - target_w) // 2
    return _as_image(image.pixels[top:top + target_h, left:left + target_w], image)


def scale(image: ImageBuffer, factor: float) -> ImageBuffer:
    """Bilinear resize by ``factor`` with half-pixel centres and edge clamping."""
    out_w, out_h = scaled_dims(image.width, image.height, factor)
    values = _accel.resize_bilinear(image.pixels, out_h, out_w, float(factor))
    return ImageBuffer(clamp_round(values))


def _nearest_index(n_out: int, n_in: int, factor: float) -> np.ndarray:
    src = (np.arange(n_out, dtype=np.float64) + 0.5) / factor - 0.5
    return np.clip(_round_half_away(src).astype(np.int64), 0, n_in - 1)


def scale_mask(mask: BinaryMask, factor: float) -> BinaryMask:
    out_w, out_h = scaled_dims(mask.width, mask.height, factor)
    rows = _nearest_index(out_h, mask.height, float(factor))
    cols = _nearest_index(out_w, mask.width, float(factor))
    return BinaryMask(mask.pixels[rows][:, cols])


def shear_horizontal(image: ImageBuffer, k: float, fill: int = 0) -> ImageBuffer:
    """Horizontal shear: output (y, x) samples the source at x - k*y on row y."""
    if not math.isfinite(k):
        raise ValueError(f"shear coefficient must be finite, got {k}")
    values = _accel.shear_bilinear(image.pixels, float(k), float(fill))
    return ImageBuffer(clamp_round(values))


def shear_mask(mask: BinaryMask, k: float) -> BinaryMask:
    if not math.isfinite(k):
        raise ValueError(f"shear coefficient must be finite, got {k}")
    h, w = mask.pixels.shape
    ys = np.arange(h, dtype=np.float64)[:, None]
    xs = np.arange(w, dtype=np.float64)[None, :]
    sx = np.clip(xs - k * ys, -2.0, w + 1.0)
    idx = _round_half_away(sx).astype(np.int64)
    ok = (idx >= 0) & (idx < w)
    rows = np.broadcast_to(np.arange(h)[:, None], idx.shape)
    vals = mask.pixels[rows, np.clip(idx, 0, w - 1)]
    return BinaryMask(np.where(ok, vals, np.uint8(0)))


def scale_and_crop(image, factor: float):
    """Resize, then centre-crop back to the source size when it grew."""
    w, h = image.width, image.height
    out = scale_mask(image, factor) if isinstance(image, BinaryMask) else scale(image, factor)
    if out.width >= w and out.height >= h:
        out = crop_center(out, w, h)
    return out
