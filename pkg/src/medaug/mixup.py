"""Mask-aware mixup of image/mask pairs.

Two modes:

``global``
    Whole-image convex blend of both images and both masks.
``composite``
    Only the first pair's lesion (its mask foreground) is blended onto the
    second image; everything else is the second image untouched.

Blended masks are kept as a soft plane in [0, 1] and binarized at >= 0.5
(a tie counts as foreground).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DatasetTooSmall, DimensionMismatch, HeterogeneousDims, InvalidLambda
from .raster import BinaryMask, ImageBuffer, SamplePair, clamp_round
from .rng import DEFAULT_ALPHA, derive_stream

MODES = ("global", "composite")


@dataclass(frozen=True, eq=False)
class MixupResult:
    image: ImageBuffer
    mask: BinaryMask
    soft_mask: np.ndarray
    lam: float
    source_ids: tuple
    mode: str

    @property
    def pair(self) -> SamplePair:
        return SamplePair(self.image, self.mask)


def _check(a: SamplePair, b: SamplePair, lam: float):
    if a.image.pixels.shape != b.image.pixels.shape:
        raise DimensionMismatch(
            f"cannot mix {a.image.width}x{a.image.height}x{a.image.channels} with "
            f"{b.image.width}x{b.image.height}x{b.image.channels}")
    if not 0.0 <= lam <= 1.0:
        raise InvalidLambda(f"lambda must be in [0, 1], got {lam}")


def _binarize(soft: np.ndarray) -> BinaryMask:
    return BinaryMask.from_bool(soft >= 0.5)


def mixup_global(a: SamplePair, b: SamplePair, lam: float, source_ids=(0, 1)) -> MixupResult:
    """``lam * a + (1 - lam) * b`` for images and masks.

    The weights are taken as ``wb = 1 - lam`` and ``wa = 1 - wb`` so that
    swapping the pairs and passing ``1 - lam`` reproduces the same floats:
    the result is bit-exactly symmetric. ``wa`` differs from ``lam`` by at
    most one ulp.
    """
    _check(a, b, lam)
    wb = 1.0 - lam
    wa = 1.0 - wb
    image = a.image.pixels.astype(np.float64) * wa + b.image.pixels.astype(np.float64) * wb
    soft = a.mask.foreground.astype(np.float64) * wa + b.mask.foreground.astype(np.float64) * wb
    soft.setflags(write=False)
    return MixupResult(ImageBuffer(clamp_round(image)), _binarize(soft), soft,
                       float(lam), tuple(source_ids), "global")


def mixup_composite(a: SamplePair, b: SamplePair, lam: float, source_ids=(0, 1)) -> MixupResult:
    """Paste ``a``'s lesion onto ``b`` with opacity ``lam``.

    ``b``'s foreground always survives in the mask; ``a``'s is labelled
    only when ``lam >= 0.5``.
    """
    _check(a, b, lam)
    fa = a.mask.foreground
    ia = a.image.pixels.astype(np.float64)
    ib = b.image.pixels.astype(np.float64)
    blended = clamp_round(lam * ia + (1.0 - lam) * ib)
    image = np.where(fa[:, :, None], blended, b.image.pixels)
    soft = np.maximum(lam * fa.astype(np.float64), b.mask.foreground.astype(np.float64))
    soft.setflags(write=False)
    return MixupResult(ImageBuffer(image), _binarize(soft), soft,
                       float(lam), tuple(source_ids), "composite")


_MIXERS = {"global": mixup_global, "composite": mixup_composite}


def mix(a: SamplePair, b: SamplePair, lam: float, mode: str = "global", source_ids=(0, 1)) -> MixupResult:
    try:
        mixer = _MIXERS[mode]
    except KeyError:
        raise ValueError(f"unknown mixup mode {mode!r}; expected one of {MODES}") from None
    return mixer(a, b, lam, source_ids)


def draw_mix_recipe(master_seed: int, k: int, n: int, alpha: float = DEFAULT_ALPHA) -> tuple[int, int, float]:
    """Indices (i, j), i != j, and lambda for the k-th generated pair.

    Consumes stream k in a fixed order: first index, second index (redrawn
    on collision), then one Beta draw.
    """
    stream = derive_stream(master_seed, k)
    i = stream.randbelow(n)
    j = stream.randbelow(n)
    while j == i:
        j = stream.randbelow(n)
    return i, j, stream.beta(alpha)


def validate_dataset(dataset: Sequence[SamplePair]) -> None:
    if len(dataset) < 2:
        raise DatasetTooSmall(f"mixup needs at least 2 pairs, got {len(dataset)}")
    shape = dataset[0].image.pixels.shape
    for idx, pair in enumerate(dataset):
        if pair.image.pixels.shape != shape:
            raise HeterogeneousDims(
                f"pair {idx} is {pair.image.width}x{pair.image.height}x{pair.image.channels}, "
                f"expected {shape[1]}x{shape[0]}x{shape[2]}")


def generate_mixup_set(dataset: Sequence[SamplePair], count: int, alpha: float = DEFAULT_ALPHA,
                       mode: str = "global", master_seed: int = 42, workers: int = 1,
                       ids: Sequence | None = None) -> list[MixupResult]:
    """Generate ``count`` mixed pairs; output is independent of ``workers``."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if mode not in _MIXERS:
        raise ValueError(f"unknown mixup mode {mode!r}; expected one of {MODES}")
    validate_dataset(dataset)
    n = len(dataset)
    ids = list(range(n)) if ids is None else list(ids)

    def one(k):
        i, j, lam = draw_mix_recipe(master_seed, k, n, alpha)
        return mix(dataset[i], dataset[j], lam, mode, (ids[i], ids[j]))

    if workers <= 1:
        return [one(k) for k in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(count)))
