"""Reference detection/segmentation losses with analytic gradients.

Pure numpy evaluations of the five training terms used by center-point
facade detectors — semantic cross-entropy, penalty-reduced focal loss on
the center heatmap, L1 size loss, and masked L1 offset/corner losses — plus
the target encoding that produces heatmaps and sub-cell offsets from
extracted objects at an output stride R. No network, no training loop: the
point is verifiable numbers, so every loss has an analytic gradient and a
central-finite-difference checker.
"""

from __future__ import annotations

import math
import warnings as _warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import NoInstances, OutOfBounds
from .instances import FacadeObject

__all__ = [
    "LossWeights",
    "DetectionTargets",
    "one_hot",
    "encode_targets",
    "cross_entropy",
    "cross_entropy_grad",
    "focal_loss",
    "focal_loss_grad",
    "size_loss",
    "size_loss_grad",
    "offset_loss",
    "offset_loss_grad",
    "corner_loss",
    "corner_loss_grad",
    "total_loss",
    "grad_check",
]

LOG_CLAMP = 1e-12


@dataclass(frozen=True)
class LossWeights:
    """Multipliers for the four detection terms; the semantic term is unweighted."""

    lambda_det: float = 1.0
    lambda_size: float = 1.0
    lambda_offset: float = 1.0
    lambda_corner: float = 1.0


@dataclass(frozen=True)
class DetectionTargets:
    """Ground-truth encodings for one image at stride R.

    heatmap: (num_object_classes, H/R, W/R) with an exact 1.0 peak at every
        object's low-res cell and Gaussian penalty-reduction splats around
        it (overlaps merged by max).
    size_targets: (N, 2) object (w, h) in pixels.
    offset_targets: (N, 2) sub-cell center remainders in [0, 1).
    corner_targets: (N, 4, 2) sub-cell corner remainders, TL TR BR BL.
    object_cells / corner_cells: the (x, y) low-res cells those targets
        attach to.
    """

    heatmap: np.ndarray
    heatmap_classes: tuple[int, ...]
    size_targets: np.ndarray
    offset_targets: np.ndarray
    corner_targets: np.ndarray
    object_cells: np.ndarray
    corner_cells: np.ndarray
    stride: int = 4

    @property
    def num_instances(self) -> int:
        return len(self.size_targets)


def one_hot(labelmap: np.ndarray, num_classes: int) -> np.ndarray:
    """(H, W) class ids -> (H, W, C) float64 one-hot."""
    labelmap = np.asarray(labelmap)
    out = np.zeros(labelmap.shape + (num_classes,), dtype=np.float64)
    np.put_along_axis(out, labelmap[..., None].astype(np.int64), 1.0, axis=-1)
    return out


def _splat(channel: np.ndarray, cell: tuple[int, int], radius: float) -> None:
    """Max-merge a Gaussian bump of peak 1.0 centered on ``cell``."""
    r = max(1, int(round(radius)))
    sigma = (2.0 * r + 1.0) / 6.0
    cx, cy = cell
    height, width = channel.shape
    x0, x1 = max(cx - r, 0), min(cx + r + 1, width)
    y0, y1 = max(cy - r, 0), min(cy + r + 1, height)
    xs = np.arange(x0, x1) - cx
    ys = np.arange(y0, y1) - cy
    bump = np.exp(-(xs[None, :] ** 2 + ys[:, None] ** 2) / (2.0 * sigma * sigma))
    np.maximum(channel[y0:y1, x0:x1], bump, out=channel[y0:y1, x0:x1])


def encode_targets(
    objects: Sequence[FacadeObject], image_size: tuple[int, int], stride: int = 4
) -> DetectionTargets:
    """Build heatmap/size/offset/corner targets from extracted objects.

    Low-res grid cells are floor(p / stride); the lost fraction p/stride −
    floor(p/stride) becomes the offset target. Heatmap splat radius is
    min(w, h) / (2·stride), clamped to at least one cell.
    """
    width, height = int(image_size[0]), int(image_size[1])
    grid_w = math.ceil(width / stride)
    grid_h = math.ceil(height / stride)
    classes = tuple(sorted({o.class_id for o in objects}))
    channel = {cid: k for k, cid in enumerate(classes)}
    n = len(objects)
    heatmap = np.zeros((len(classes), grid_h, grid_w), dtype=np.float64)
    size_targets = np.zeros((n, 2))
    offset_targets = np.zeros((n, 2))
    corner_targets = np.zeros((n, 4, 2))
    object_cells = np.zeros((n, 2), dtype=np.int64)
    corner_cells = np.zeros((n, 4, 2), dtype=np.int64)
    for i, obj in enumerate(objects):
        cx, cy = obj.center
        if not (0 <= cx < width and 0 <= cy < height):
            raise OutOfBounds(f"object center ({cx}, {cy}) outside {width}x{height}")
        gx, gy = cx / stride, cy / stride
        ix, iy = int(math.floor(gx)), int(math.floor(gy))
        object_cells[i] = (ix, iy)
        offset_targets[i] = (gx - ix, gy - iy)
        size_targets[i] = obj.size
        radius = max(1.0, min(obj.size) / (2.0 * stride))
        _splat(heatmap[channel[obj.class_id]], (ix, iy), radius)
        for k, (qx, qy) in enumerate(obj.corners):
            qgx, qgy = qx / stride, qy / stride
            qix, qiy = int(math.floor(qgx)), int(math.floor(qgy))
            corner_cells[i, k] = (qix, qiy)
            corner_targets[i, k] = (qgx - qix, qgy - qiy)
    # splat peaks are exactly 1 at their own cell; re-assert despite overlaps
    for i, obj in enumerate(objects):
        heatmap[channel[obj.class_id], object_cells[i, 1], object_cells[i, 0]] = 1.0
    return DetectionTargets(
        heatmap=heatmap,
        heatmap_classes=classes,
        size_targets=size_targets,
        offset_targets=offset_targets,
        corner_targets=corner_targets,
        object_cells=object_cells,
        corner_cells=corner_cells,
        stride=stride,
    )


# ---------------------------------------------------------------- losses


def _cross_entropy_raw(pred: np.ndarray, truth: np.ndarray) -> float:
    clamped = np.clip(pred, LOG_CLAMP, None)
    return float(-(truth * np.log(clamped)).sum())


def cross_entropy(pred: np.ndarray, truth: np.ndarray) -> float:
    """Semantic loss −Σ_pixels Σ_classes y·log(p) over probability grids.

    ``pred`` is (H, W, C) with rows summing to 1 (tolerance 1e-6); ``truth``
    is one-hot of the same shape. Zero probability at a true class is
    clamped at 1e-12 with a diagnostic warning instead of returning +inf.
    """
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape:
        raise ValueError(f"pred {pred.shape} vs truth {truth.shape}")
    sums = pred.sum(axis=-1)
    if not np.allclose(sums, 1.0, atol=1e-6):
        raise ValueError("pred class probabilities must sum to 1 per pixel")
    if not ((truth == 0) | (truth == 1)).all() or not (truth.sum(axis=-1) == 1).all():
        raise ValueError("truth must be one-hot")
    if (pred[truth > 0] < LOG_CLAMP).any():
        _warnings.warn("zero probability at a true class; clamped at 1e-12")
    return _cross_entropy_raw(pred, truth)


def cross_entropy_grad(pred: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """d/dp of the clamped cross entropy: −y/p where unclamped, else 0."""
    pred = np.asarray(pred, dtype=np.float64)
    grad = np.zeros_like(pred)
    active = pred > LOG_CLAMP
    grad[active] = -truth[active] / pred[active]
    return grad


def _focal_count(truth: np.ndarray) -> int:
    return int((truth == 1.0).sum())


def focal_loss(
    pred: np.ndarray,
    truth: np.ndarray,
    alpha: float = 2.0,
    beta: float = 4.0,
    num_instances: int | None = None,
) -> float:
    """Penalty-reduced focal loss on a center heatmap.

    Peak cells (truth exactly 1) contribute (1−p)^α·log p; all other cells
    contribute (1−y)^β·p^α·log(1−p); the total is negated and divided by
    the instance count (default: the number of peak cells).
    """
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape:
        raise ValueError(f"pred {pred.shape} vs truth {truth.shape}")
    if not ((pred > 0.0) & (pred < 1.0)).all():
        raise ValueError("focal loss needs predictions strictly inside (0, 1)")
    n = _focal_count(truth) if num_instances is None else int(num_instances)
    if n < 1:
        raise NoInstances("focal loss undefined for zero instances")
    pos = truth == 1.0
    pos_term = ((1.0 - pred[pos]) ** alpha * np.log(pred[pos])).sum()
    neg = ~pos
    neg_term = (
        (1.0 - truth[neg]) ** beta * pred[neg] ** alpha * np.log(1.0 - pred[neg])
    ).sum()
    return float(-(pos_term + neg_term) / n)


def focal_loss_grad(
    pred: np.ndarray,
    truth: np.ndarray,
    alpha: float = 2.0,
    beta: float = 4.0,
    num_instances: int | None = None,
) -> np.ndarray:
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    n = _focal_count(truth) if num_instances is None else int(num_instances)
    if n < 1:
        raise NoInstances("focal loss undefined for zero instances")
    grad = np.empty_like(pred)
    pos = truth == 1.0
    p = pred[pos]
    grad[pos] = -(
        -alpha * (1.0 - p) ** (alpha - 1.0) * np.log(p) + (1.0 - p) ** alpha / p
    )
    q = pred[~pos]
    w = (1.0 - truth[~pos]) ** beta
    grad[~pos] = -w * (
        alpha * q ** (alpha - 1.0) * np.log(1.0 - q) - q**alpha / (1.0 - q)
    )
    return grad / n


def size_loss(
    pred: np.ndarray, target: np.ndarray, *, per_dimension: bool = False
) -> float:
    """L1 size regression over (N, 2) boxes.

    Default: mean |(ŵ+ĥ) − (w+h)| — the summed-dimension residual, which a
    wrong aspect ratio with the right perimeter can alias to zero. The
    per-dimension variant mean(|ŵ−w| + |ĥ−h|) closes that hole.
    """
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape or pred.ndim != 2 or pred.shape[1] != 2:
        raise ValueError(f"expected matching (N, 2) arrays, got {pred.shape}")
    if len(pred) == 0:
        raise NoInstances("size loss undefined for zero instances")
    if per_dimension:
        return float(np.abs(pred - target).sum(axis=1).mean())
    return float(np.abs(pred.sum(axis=1) - target.sum(axis=1)).mean())


def size_loss_grad(
    pred: np.ndarray, target: np.ndarray, *, per_dimension: bool = False
) -> np.ndarray:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    n = len(pred)
    if per_dimension:
        return np.sign(pred - target) / n
    residual = pred.sum(axis=1) - target.sum(axis=1)
    return np.repeat(np.sign(residual)[:, None], 2, axis=1) / n


def _masked_l1(
    pred: np.ndarray, cells: np.ndarray, targets: np.ndarray, first_channel: int
) -> float:
    """Sum of |pred[cell] − target| over the two channels starting at first_channel."""
    got = pred[cells[:, 1], cells[:, 0], first_channel : first_channel + 2]
    return float(np.abs(got - targets).sum())


def offset_loss(pred: np.ndarray, targets: DetectionTargets) -> float:
    """Masked L1 on the (H/R, W/R, 2) offset map at object cells, / N."""
    pred = np.asarray(pred, dtype=np.float64)
    n = targets.num_instances
    if n < 1:
        raise NoInstances("offset loss undefined for zero instances")
    return _masked_l1(pred, targets.object_cells, targets.offset_targets, 0) / n


def offset_loss_grad(pred: np.ndarray, targets: DetectionTargets) -> np.ndarray:
    pred = np.asarray(pred, dtype=np.float64)
    n = targets.num_instances
    grad = np.zeros_like(pred)
    cells = targets.object_cells
    residual = pred[cells[:, 1], cells[:, 0], 0:2] - targets.offset_targets
    for ch in range(2):
        np.add.at(grad[..., ch], (cells[:, 1], cells[:, 0]), np.sign(residual[:, ch]) / n)
    return grad


def corner_loss(pred: np.ndarray, targets: DetectionTargets) -> float:
    """Masked L1 on the (H/R, W/R, 8) corner map; two channels per corner."""
    pred = np.asarray(pred, dtype=np.float64)
    n = targets.num_instances
    if n < 1:
        raise NoInstances("corner loss undefined for zero instances")
    total = 0.0
    for k in range(4):
        total += _masked_l1(
            pred, targets.corner_cells[:, k], targets.corner_targets[:, k], 2 * k
        )
    return total / n


def corner_loss_grad(pred: np.ndarray, targets: DetectionTargets) -> np.ndarray:
    pred = np.asarray(pred, dtype=np.float64)
    n = targets.num_instances
    grad = np.zeros_like(pred)
    for k in range(4):
        cells = targets.corner_cells[:, k]
        residual = (
            pred[cells[:, 1], cells[:, 0], 2 * k : 2 * k + 2]
            - targets.corner_targets[:, k]
        )
        for ch in range(2):
            np.add.at(
                grad[..., 2 * k + ch],
                (cells[:, 1], cells[:, 0]),
                np.sign(residual[:, ch]) / n,
            )
    return grad


def total_loss(
    semantic: float,
    detection: float,
    size: float,
    offset: float,
    corner: float,
    weights: LossWeights | None = None,
) -> float:
    """Weighted sum of the five parts; linear in every weight."""
    w = weights or LossWeights()
    return float(
        semantic
        + w.lambda_det * detection
        + w.lambda_size * size
        + w.lambda_offset * offset
        + w.lambda_corner * corner
    )


# ---------------------------------------------------------- gradient check


def _kink_distance_size(point: dict) -> np.ndarray:
    pred, target = point["pred"], point["target"]
    if point.get("per_dimension", False):
        return np.abs(pred - target)
    residual = np.abs(pred.sum(axis=1) - target.sum(axis=1))
    return np.repeat(residual[:, None], 2, axis=1)


def _kink_distance_masked(shape: tuple, blocks) -> np.ndarray:
    """Smallest |residual| influencing each coordinate; +inf elsewhere.

    ``blocks`` is a list of (cells (N,2), residuals (N,2), first_channel).
    """
    dist = np.full(shape, np.inf)
    for cell_block, res_block, fc in blocks:
        for i in range(len(cell_block)):
            x, y = cell_block[i]
            for ch in range(2):
                dist[y, x, fc + ch] = min(
                    dist[y, x, fc + ch], abs(res_block[i, ch])
                )
    return dist


def grad_check(
    loss: str,
    point: dict,
    epsilon: float = 1e-5,
    max_samples: int = 150,
    rng: np.random.Generator | None = None,
) -> float:
    """Worst relative error between analytic and central-difference gradients.

    ``loss`` names the loss ("cross_entropy", "focal", "size", "offset",
    "corner"); ``point`` carries its inputs under the keys used by the loss
    functions (predictions under "pred"). Coordinates are subsampled to
    ``max_samples``; for the L1 losses, coordinates whose residual sits
    within 10·epsilon of a kink are skipped, since no two-sided difference
    is meaningful there.
    """
    rng = rng or np.random.default_rng(0)
    pred = np.array(point["pred"], dtype=np.float64)
    kink: np.ndarray | None = None

    if loss == "cross_entropy":
        truth = point["truth"]
        fn = lambda p: _cross_entropy_raw(p, truth)  # noqa: E731
        analytic = cross_entropy_grad(pred, truth)
    elif loss == "focal":
        truth = point["truth"]
        alpha = point.get("alpha", 2.0)
        beta = point.get("beta", 4.0)
        n = point.get("num_instances")
        fn = lambda p: focal_loss(p, truth, alpha, beta, n)  # noqa: E731
        analytic = focal_loss_grad(pred, truth, alpha, beta, n)
    elif loss == "size":
        target = point["target"]
        per_dim = point.get("per_dimension", False)
        fn = lambda p: size_loss(p, target, per_dimension=per_dim)  # noqa: E731
        analytic = size_loss_grad(pred, target, per_dimension=per_dim)
        kink = _kink_distance_size({"pred": pred, "target": target, "per_dimension": per_dim})
    elif loss == "offset":
        targets: DetectionTargets = point["targets"]
        fn = lambda p: offset_loss(p, targets)  # noqa: E731
        analytic = offset_loss_grad(pred, targets)
        res = (
            pred[targets.object_cells[:, 1], targets.object_cells[:, 0], 0:2]
            - targets.offset_targets
        )
        kink = _kink_distance_masked(pred.shape, [(targets.object_cells, res, 0)])
    elif loss == "corner":
        targets = point["targets"]
        fn = lambda p: corner_loss(p, targets)  # noqa: E731
        analytic = corner_loss_grad(pred, targets)
        blocks = []
        for k in range(4):
            cells = targets.corner_cells[:, k]
            res = pred[cells[:, 1], cells[:, 0], 2 * k : 2 * k + 2] - targets.corner_targets[:, k]
            blocks.append((cells, res, 2 * k))
        kink = _kink_distance_masked(pred.shape, blocks)
    else:
        raise ValueError(f"unknown loss {loss!r}")

    count = min(max_samples, pred.size)
    coords = rng.choice(pred.size, size=count, replace=False)
    worst = 0.0
    for flat in coords:
        if kink is not None and kink.flat[flat] < 10.0 * epsilon:
            continue
        bump = np.zeros_like(pred)
        bump.flat[flat] = epsilon
        fd = (fn(pred + bump) - fn(pred - bump)) / (2.0 * epsilon)
        a = analytic.flat[flat]
        err = abs(a - fd) / max(abs(a), abs(fd), 1e-6)
        worst = max(worst, err)
    return worst
