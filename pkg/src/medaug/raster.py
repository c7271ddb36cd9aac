"""Pixel containers, BT.601 luma/chroma conversion and output quantization.

Images are stored as C-contiguous ``uint8`` arrays of shape ``(H, W, C)``
with ``C`` in ``{1, 3}``; masks as ``(H, W)`` arrays holding only 0 and 255.
Both containers freeze their buffer so they can be shared between workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChannelMismatch, DimensionMismatch

# BT.601 full-range (JFIF) coefficients
_Y_WEIGHTS = (0.299, 0.587, 0.114)
_CB_WEIGHTS = (-0.168736, -0.331264, 0.5)
_CR_WEIGHTS = (0.5, -0.418688, -0.081312)
_R_FROM_CR = 1.402
_G_FROM_CB = 0.344136
_G_FROM_CR = 0.714136
_B_FROM_CB = 1.772


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """An 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise DimensionMismatch(f"expected (H, W) or (H, W, C) array, got shape {arr.shape}")
        if arr.shape[2] not in (1, 3):
            raise ChannelMismatch(f"channels must be 1 or 3, got {arr.shape[2]}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch(f"empty raster {arr.shape[1]}x{arr.shape[0]}")
        if arr.dtype != np.uint8:
            raise TypeError(f"samples must be uint8, got {arr.dtype}")
        object.__setattr__(self, "pixels", _frozen(arr))

    @classmethod
    def from_samples(cls, width: int, height: int, channels: int, samples) -> ImageBuffer:
        flat = np.asarray(samples, dtype=np.uint8).reshape(-1)
        if flat.size != width * height * channels:
            raise DimensionMismatch(
                f"{flat.size} samples for a {width}x{height}x{channels} raster")
        return cls(flat.reshape(height, width, channels))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    @property
    def samples(self) -> np.ndarray:
        """Row-major, channel-minor flat view of the samples."""
        return self.pixels.reshape(-1)

    def __eq__(self, other):
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(np.array_equal(self.pixels, other.pixels))

    def __repr__(self):
        return f"ImageBuffer({self.width}x{self.height}x{self.channels})"


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Single-channel segmentation label; 255 marks foreground."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim == 3 and arr.shape[2] == 1:
            arr = arr[:, :, 0]
        if arr.ndim != 2:
            raise DimensionMismatch(f"mask must be (H, W), got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch(f"empty mask {arr.shape[1]}x{arr.shape[0]}")
        if arr.dtype == np.bool_:
            arr = arr.astype(np.uint8) * np.uint8(255)
        if arr.dtype != np.uint8:
            raise TypeError(f"mask samples must be uint8, got {arr.dtype}")
        if not np.all((arr == 0) | (arr == 255)):
            raise ValueError("mask samples must be 0 or 255")
        object.__setattr__(self, "pixels", _frozen(arr))

    @classmethod
    def from_bool(cls, fg: np.ndarray) -> BinaryMask:
        return cls(np.where(fg, np.uint8(255), np.uint8(0)))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def samples(self) -> np.ndarray:
        return self.pixels.reshape(-1)

    @property
    def foreground(self) -> np.ndarray:
        return self.pixels == 255

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(np.array_equal(self.pixels, other.pixels))

    def __repr__(self):
        return f"BinaryMask({self.width}x{self.height}, fg={int(self.foreground.sum())})"


@dataclass(frozen=True)
class SamplePair:
    image: ImageBuffer
    mask: BinaryMask

    def __post_init__(self):
        if (self.image.width, self.image.height) != (self.mask.width, self.mask.height):
            raise DimensionMismatch(
                f"image is {self.image.width}x{self.image.height}, "
                f"mask is {self.mask.width}x{self.mask.height}")


def clamp_round(v):
    """Round half away from zero, then clamp to [0, 255].

    Scalars give an ``int``; arrays give a ``uint8`` array of the same shape.
    Negative inputs all land on 0 after clamping, so only the non-negative
    half-up rule is observable. ``floor`` plus an exact fractional-part test
    avoids the ``x + 0.5`` rounding trap at 0.49999999999999994.
    """
    arr = np.asarray(v, dtype=np.float64)
    fl = np.floor(arr)
    rounded = fl + ((arr - fl) >= 0.5)
    out = np.clip(rounded, 0.0, 255.0).astype(np.uint8)
    if out.ndim == 0:
        return int(out)
    return out


def rgb_to_luma(image: ImageBuffer) -> tuple[ImageBuffer, tuple[np.ndarray, np.ndarray]]:
    """Split an RGB image into quantized Y and real-valued (Cb, Cr) planes."""
    if image.channels != 3:
        raise ChannelMismatch(f"rgb_to_luma needs 3 channels, got {image.channels}")
    rgb = image.pixels.astype(np.float64)
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    y = _Y_WEIGHTS[0] * r + _Y_WEIGHTS[1] * g + _Y_WEIGHTS[2] * b
    cb = _CB_WEIGHTS[0] * r + _CB_WEIGHTS[1] * g + _CB_WEIGHTS[2] * b + 128.0
    cr = _CR_WEIGHTS[0] * r + _CR_WEIGHTS[1] * g + _CR_WEIGHTS[2] * b + 128.0
    return ImageBuffer(clamp_round(y)), (cb, cr)


def luma_to_rgb(luma: ImageBuffer, chroma: tuple[np.ndarray, np.ndarray]) -> ImageBuffer:
    if luma.channels != 1:
        raise ChannelMismatch(f"luma plane must have 1 channel, got {luma.channels}")
    cb, cr = (np.asarray(p, dtype=np.float64) for p in chroma)
    shape = (luma.height, luma.width)
    if cb.shape != shape or cr.shape != shape:
        raise DimensionMismatch(f"chroma planes {cb.shape}/{cr.shape} do not match luma {shape}")
    y = luma.pixels[:, :, 0].astype(np.float64)
    cb = cb - 128.0
    cr = cr - 128.0
    out = np.empty(shape + (3,), dtype=np.float64)
    out[:, :, 0] = y + _R_FROM_CR * cr
    out[:, :, 1] = y - _G_FROM_CB * cb - _G_FROM_CR * cr
    out[:, :, 2] = y + _B_FROM_CB * cb
    return ImageBuffer(clamp_round(out))
