"""PNG persistence for images and masks."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import UnsupportedImage
from .raster import BinaryMask, ImageBuffer

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")

MASK_THRESHOLD = 128


def _open_8bit(path) -> Image.Image:
    img = Image.open(path)
    img.load()
    mode = img.mode
    if mode in ("RGBA", "LA", "PA", "RGBa", "La") or "transparency" in img.info:
        raise UnsupportedImage(f"{path}: alpha channels are not supported (mode {mode})")
    if mode == "P":
        return img.convert("RGB")
    if mode == "1":
        return img.convert("L")
    if mode not in ("L", "RGB"):
        raise UnsupportedImage(f"{path}: only 8-bit grayscale or RGB are supported (mode {mode})")
    return img


def read_image(path) -> ImageBuffer:
    img = _open_8bit(path)
    return ImageBuffer(np.array(img, dtype=np.uint8))


def read_gray(path) -> ImageBuffer:
    """Read a single-channel image, e.g. a model's probability map."""
    img = _open_8bit(path)
    if img.mode != "L":
        img = img.convert("L")
    return ImageBuffer(np.array(img, dtype=np.uint8))


def read_mask(path, threshold: int = MASK_THRESHOLD) -> BinaryMask:
    """Read a mask, snapping lossy values: >= threshold is foreground."""
    gray = read_gray(path).pixels[:, :, 0]
    return BinaryMask.from_bool(gray >= threshold)


def _atomic_save(img: Image.Image, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    img.save(tmp, format="PNG")
    os.replace(tmp, path)


def write_image(image: ImageBuffer, path) -> None:
    px = image.pixels
    if image.channels == 1:
        img = Image.fromarray(np.ascontiguousarray(px[:, :, 0]))
    else:
        img = Image.fromarray(np.ascontiguousarray(px))
    _atomic_save(img, path)


def write_mask(mask: BinaryMask, path) -> None:
    _atomic_save(Image.fromarray(np.ascontiguousarray(mask.pixels)), path)


def list_images(directory) -> list[Path]:
    """Image files directly inside ``directory``, sorted byte-wise by path."""
    directory = Path(directory)
    files = [p for p in directory.iterdir()
             if p.is_file() and not p.name.startswith(".") and p.suffix.lower() in IMAGE_SUFFIXES]
    return sorted(files, key=lambda p: os.fsencode(p))
