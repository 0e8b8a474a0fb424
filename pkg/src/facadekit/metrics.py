"""Segmentation scoring: confusion counts, pixel accuracy, IoU, ablation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch
from .labelmap import ClassPalette, validate_labelmap

__all__ = [
    "ConfusionCounts",
    "EvalReport",
    "confusion",
    "pixel_accuracy",
    "iou",
    "evaluate_pair",
    "ablation",
]


@dataclass(frozen=True)
class ConfusionCounts:
    """Per-class pixel counts as a (C, C) matrix, truth rows × pred columns."""

    matrix: np.ndarray

    @property
    def num_classes(self) -> int:
        return self.matrix.shape[0]

    @property
    def tp(self) -> np.ndarray:
        return np.diag(self.matrix)

    @property
    def fn(self) -> np.ndarray:
        return self.matrix.sum(axis=1) - self.tp

    @property
    def fp(self) -> np.ndarray:
        return self.matrix.sum(axis=0) - self.tp

    @property
    def truth_totals(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    @property
    def total(self) -> int:
        return int(self.matrix.sum())

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        if self.matrix.shape != other.matrix.shape:
            raise DimensionMismatch("cannot merge counts over different palettes")
        return ConfusionCounts(self.matrix + other.matrix)


def confusion(
    pred: np.ndarray, truth: np.ndarray, palette: ClassPalette
) -> ConfusionCounts:
    """Exact joint pixel counts of (truth class, predicted class)."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise DimensionMismatch(f"pred {pred.shape} vs truth {truth.shape}")
    validate_labelmap(pred, palette)
    validate_labelmap(truth, palette)
    n = palette.num_classes
    joint = np.bincount(
        (truth.astype(np.int64) * n + pred.astype(np.int64)).ravel(),
        minlength=n * n,
    ).reshape(n, n)
    return ConfusionCounts(joint)


def pixel_accuracy(counts: ConfusionCounts) -> tuple[dict[int, float | None], float]:
    """Per-class TP/(TP+FN) (None when the class is absent from truth) and
    overall correct-pixel fraction."""
    per_class: dict[int, float | None] = {}
    for c in range(counts.num_classes):
        denom = counts.truth_totals[c]
        per_class[c] = float(counts.tp[c] / denom) if denom > 0 else None
    total = float(counts.tp.sum() / counts.total)
    return per_class, total


def iou(counts: ConfusionCounts) -> tuple[dict[int, float | None], float]:
    """Per-class TP/(TP+FP+FN) and the mean over classes present in truth."""
    per_class: dict[int, float | None] = {}
    present = []
    for c in range(counts.num_classes):
        if counts.truth_totals[c] == 0:
            per_class[c] = None
            continue
        union = counts.tp[c] + counts.fp[c] + counts.fn[c]
        value = float(counts.tp[c] / union) if union > 0 else 0.0
        per_class[c] = value
        present.append(value)
    # plain left-to-right sum so the mean is reproducible across runtimes
    mean = sum(present) / len(present) if present else 0.0
    return per_class, mean


@dataclass(frozen=True)
class EvalReport:
    class_names: tuple[str, ...]
    per_class_accuracy: dict[int, float | None]
    per_class_iou: dict[int, float | None]
    total_accuracy: float
    miou: float

    def to_dict(self) -> dict:
        by_name = lambda scores: {  # noqa: E731
            self.class_names[c]: scores[c] for c in sorted(scores)
        }
        return {
            "per_class_accuracy": by_name(self.per_class_accuracy),
            "per_class_iou": by_name(self.per_class_iou),
            "total_accuracy": self.total_accuracy,
            "miou": self.miou,
        }


def report_from_counts(counts: ConfusionCounts, palette: ClassPalette) -> EvalReport:
    acc, total = pixel_accuracy(counts)
    per_iou, miou = iou(counts)
    names = tuple(palette.name_of(c) for c in range(palette.num_classes))
    return EvalReport(
        class_names=names,
        per_class_accuracy=acc,
        per_class_iou=per_iou,
        total_accuracy=total,
        miou=miou,
    )


def evaluate_pair(
    pred: np.ndarray, truth: np.ndarray, palette: ClassPalette
) -> EvalReport:
    return report_from_counts(confusion(pred, truth, palette), palette)


def ablation(
    pred_before: np.ndarray,
    pred_after: np.ndarray,
    truth: np.ndarray,
    palette: ClassPalette,
) -> tuple[EvalReport, EvalReport, dict[str, float | None]]:
    """Score two predictions against one truth; deltas are after − before."""
    before = evaluate_pair(pred_before, truth, palette)
    after = evaluate_pair(pred_after, truth, palette)
    deltas: dict[str, float | None] = {}
    for c in sorted(before.per_class_iou):
        b, a = before.per_class_iou[c], after.per_class_iou[c]
        name = before.class_names[c]
        deltas[f"iou_{name}"] = None if b is None or a is None else a - b
    deltas["miou"] = after.miou - before.miou
    deltas["total_accuracy"] = after.total_accuracy - before.total_accuracy
    return before, after, deltas
