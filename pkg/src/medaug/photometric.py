"""Brightness, contrast, Gaussian noise and luma histogram equalization.

These only change intensities; masks travel alongside unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidFactor, InvalidSigma
from .raster import ImageBuffer, clamp_round, luma_to_rgb, rgb_to_luma
from .rng import RngStream

_LEVELS = np.arange(256, dtype=np.float64)


@dataclass(frozen=True)
class PhotometricParams:
    brightness_delta: int = 40
    contrast_factor: float = 1.5
    noise_sigma: float = 10.0
    noise_mean: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.contrast_factor) and self.contrast_factor > 0):
            raise InvalidFactor(f"contrast factor must be > 0, got {self.contrast_factor}")
        if not self.noise_sigma >= 0:
            raise InvalidSigma(f"noise sigma must be >= 0, got {self.noise_sigma}")


def _apply_lut(image: ImageBuffer, lut: np.ndarray) -> ImageBuffer:
    return ImageBuffer(lut[image.pixels])


def brightness_lut(delta: int) -> np.ndarray:
    return clamp_round(_LEVELS + delta)


def contrast_lut(factor: float) -> np.ndarray:
    if not (math.isfinite(factor) and factor > 0):
        raise InvalidFactor(f"contrast factor must be > 0, got {factor}")
    return clamp_round((_LEVELS - 127.5) * factor + 127.5)


def adjust_brightness(image: ImageBuffer, delta: int) -> ImageBuffer:
    return _apply_lut(image, brightness_lut(delta))


def adjust_contrast(image: ImageBuffer, factor: float) -> ImageBuffer:
    """Stretch intensities about mid-gray 127.5 by ``factor``."""
    return _apply_lut(image, contrast_lut(factor))


def add_gaussian_noise(image: ImageBuffer, stream: RngStream, mean: float = 0.0,
                       sigma: float = 10.0) -> ImageBuffer:
    """Add i.i.d. noise to every sample, drawn in row-major, channel-minor order."""
    if not sigma >= 0:
        raise InvalidSigma(f"sigma must be >= 0, got {sigma}")
    noise = stream.gaussians(image.samples.size, mean, sigma)
    noisy = image.samples.astype(np.float64) + noise
    return ImageBuffer(clamp_round(noisy).reshape(image.pixels.shape))


def equalization_lut(plane: np.ndarray) -> np.ndarray | None:
    """LUT for classical discrete equalization of an 8-bit plane.

    Returns ``None`` for a constant plane, which has nothing to stretch.
    """
    hist = np.bincount(plane.reshape(-1), minlength=256)
    cdf = np.cumsum(hist)
    total = int(cdf[-1])
    cdf_min = int(cdf[np.flatnonzero(cdf)[0]])
    if total == cdf_min:
        return None
    return clamp_round(255.0 * (cdf - cdf_min) / (total - cdf_min))


def equalize_histogram_luma(image: ImageBuffer) -> ImageBuffer:
    """Equalize Y of BT.601 YCbCr (or the single gray channel) and leave chroma alone."""
    if image.channels == 1:
        lut = equalization_lut(image.pixels)
        return image if lut is None else _apply_lut(image, lut)
    luma, chroma = rgb_to_luma(image)
    lut = equalization_lut(luma.pixels)
    if lut is None:
        return image
    return luma_to_rgb(_apply_lut(luma, lut), chroma)
