"""Dice overlap for segmentation and 2-class confusion/accuracy."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (ChannelMismatch, DimensionMismatch, EmptyEvaluationSet, EmptyInput,
                     LengthMismatch)
from .raster import BinaryMask, ImageBuffer


@dataclass(frozen=True)
class DiceReport:
    per_item: list = field(default_factory=list)
    mean_dice: float = 0.0

    def to_dict(self) -> dict:
        return {
            "per_item": [{"id": str(item), "dice": d} for item, d in self.per_item],
            "mean_dice": self.mean_dice,
        }


@dataclass(frozen=True)
class ConfusionMatrix2:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def dice(pred: BinaryMask, truth: BinaryMask) -> float:
    """2|A & B| / (|A| + |B|); two empty masks agree perfectly (1.0)."""
    if pred.pixels.shape != truth.pixels.shape:
        raise DimensionMismatch(
            f"prediction is {pred.width}x{pred.height}, truth is {truth.width}x{truth.height}")
    a = pred.foreground
    b = truth.foreground
    denom = int(a.sum()) + int(b.sum())
    if denom == 0:
        return 1.0
    return 2.0 * int(np.logical_and(a, b).sum()) / denom


def mean_dice(pairs: Iterable, ids: Sequence | None = None) -> DiceReport:
    """Per-item Dice averaged over items (not pooled over pixels)."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyEvaluationSet("no prediction/truth pairs to evaluate")
    ids = list(range(len(pairs))) if ids is None else list(ids)
    per_item = []
    for item_id, (pred, truth) in zip(ids, pairs):
        try:
            per_item.append((item_id, dice(pred, truth)))
        except DimensionMismatch as exc:
            raise DimensionMismatch(f"item {item_id}: {exc}") from None
    return DiceReport(per_item, sum(d for _, d in per_item) / len(per_item))


def binarize_prediction(gray: ImageBuffer, threshold: int = 128) -> BinaryMask:
    if gray.channels != 1:
        raise ChannelMismatch(f"prediction must be single-channel, got {gray.channels}")
    return BinaryMask.from_bool(gray.pixels[:, :, 0] >= threshold)


def confusion_and_accuracy(pred_labels: Sequence[int], true_labels: Sequence[int]):
    """Counts with 1 as the positive class; returns (ConfusionMatrix2, accuracy)."""
    pred = np.asarray(pred_labels, dtype=np.int64).reshape(-1)
    true = np.asarray(true_labels, dtype=np.int64).reshape(-1)
    if pred.size != true.size:
        raise LengthMismatch(f"{pred.size} predictions for {true.size} labels")
    if pred.size == 0:
        raise EmptyInput("no labels to evaluate")
    for name, arr in (("pred", pred), ("truth", true)):
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError(f"{name} labels must be 0 or 1")
    cm = ConfusionMatrix2(
        tp=int(np.sum((pred == 1) & (true == 1))),
        fp=int(np.sum((pred == 1) & (true == 0))),
        fn=int(np.sum((pred == 0) & (true == 1))),
        tn=int(np.sum((pred == 0) & (true == 0))),
    )
    return cm, (cm.tp + cm.tn) / cm.total
