"""Re-rasterize a refined object layout over a cleared background map."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .exceptions import ConfigError, NoBackground
from .instances import FacadeObject
from .labelmap import ClassPalette, validate_labelmap

__all__ = [
    "round_half_up",
    "default_draw_order",
    "clear_objects",
    "paint_rect",
    "rasterize",
]

_PREFERRED_ORDER = ("balcony", "door", "window")  # windows painted on top


def round_half_up(value: float) -> int:
    """Round with .5 going up (toward +inf); deterministic across platforms."""
    return int(np.floor(value + 0.5))


def default_draw_order(palette: ClassPalette) -> tuple[int, ...]:
    """Object classes in paint order: balcony, door, window, then the rest."""
    order = [
        palette.id_of(name) for name in _PREFERRED_ORDER if palette.has_class(name)
    ]
    order = [cid for cid in order if cid in palette.object_ids]
    order += [cid for cid in sorted(palette.object_ids) if cid not in order]
    return tuple(order)


def clear_objects(labelmap: np.ndarray, palette: ClassPalette) -> np.ndarray:
    """Replace object-class pixels with the class of the surrounding region.

    A multi-source wavefront grows outward from all non-object pixels at
    once (4-connected). Each newly reached pixel takes the majority class
    among its already-assigned neighbors, ties to the smaller class id —
    so every object pixel ends up with the (majority) class of its nearest
    non-object region.
    """
    labelmap = np.asarray(labelmap)
    validate_labelmap(labelmap, palette)
    if not palette.object_ids:
        return labelmap.copy()
    object_mask = np.isin(labelmap, palette.object_ids)
    if object_mask.all():
        raise NoBackground("every pixel belongs to an object class")
    if not object_mask.any():
        return labelmap.copy()

    work = np.where(object_mask, -1, labelmap).astype(np.int64)
    classes = np.unique(work[work >= 0])
    height, width = work.shape
    neighbors = np.empty((4, height, width), dtype=np.int64)
    while (work < 0).any():
        neighbors.fill(-1)
        neighbors[0, 1:, :] = work[:-1, :]
        neighbors[1, :-1, :] = work[1:, :]
        neighbors[2, :, 1:] = work[:, :-1]
        neighbors[3, :, :-1] = work[:, 1:]
        counts = np.zeros((len(classes), height, width), dtype=np.uint8)
        for ci, cls in enumerate(classes):
            counts[ci] = (neighbors == cls).sum(axis=0)
        reached = (work < 0) & (counts.sum(axis=0) > 0)
        if not reached.any():  # pragma: no cover - grid is connected
            break
        # argmax picks the first maximum: ascending class order breaks ties
        work[reached] = classes[np.argmax(counts[:, reached], axis=0)]
    return work.astype(labelmap.dtype)


def paint_rect(
    out: np.ndarray,
    class_id: int,
    center: tuple[float, float],
    size: tuple[float, float],
) -> bool:
    """Paint a filled rectangle, clipped to bounds; False if fully outside."""
    height, width = out.shape
    x1 = round_half_up(center[0] - size[0] / 2.0)
    x2 = round_half_up(center[0] + size[0] / 2.0)
    y1 = round_half_up(center[1] - size[1] / 2.0)
    y2 = round_half_up(center[1] + size[1] / 2.0)
    x1c, x2c = max(x1, 0), min(x2, width)
    y1c, y2c = max(y1, 0), min(y2, height)
    if x1c >= x2c or y1c >= y2c:
        return False
    out[y1c:y2c, x1c:x2c] = class_id
    return True


def rasterize(
    background: np.ndarray,
    layout,
    order: Sequence[int] | None = None,
    *,
    palette: ClassPalette | None = None,
    warnings: list | None = None,
) -> np.ndarray:
    """Paint refined objects over a cleared background map.

    Args:
        background: label map with object pixels already cleared
            (see :func:`clear_objects`).
        layout: a RefinedLayout or any sequence of FacadeObject.
        order: class ids painted first-to-last (later wins overlaps). When
            omitted, requires ``palette`` and uses :func:`default_draw_order`.
        palette: if given, validates that ``order`` covers every object
            class exactly once.
        warnings: optional list collecting a record per skipped object.

    Returns:
        New label map; objects entirely outside the image are skipped with
        a warning record, partially outside ones are clipped.
    """
    objects: Sequence[FacadeObject] = getattr(layout, "objects", layout)
    if order is None:
        if palette is None:
            raise ConfigError("rasterize needs an explicit order or a palette")
        order = default_draw_order(palette)
    order = tuple(order)
    if len(set(order)) != len(order):
        raise ConfigError(f"draw order repeats a class: {order}")
    if palette is not None and set(order) != set(palette.object_ids):
        raise ConfigError(
            f"draw order {order} must cover object classes "
            f"{tuple(palette.object_ids)} exactly once"
        )
    missing = {o.class_id for o in objects} - set(order)
    if missing:
        raise ConfigError(f"objects of class {sorted(missing)} not in draw order")

    out = np.asarray(background).copy()
    for class_id in order:
        for obj in objects:
            if obj.class_id != class_id:
                continue
            if not paint_rect(out, class_id, obj.center, obj.size):
                record = {
                    "event": "object_skipped",
                    "class": int(class_id),
                    "center": [float(obj.center[0]), float(obj.center[1])],
                    "size": [float(obj.size[0]), float(obj.size[1])],
                    "reason": "entirely outside bounds",
                }
                if warnings is not None:
                    warnings.append(record)
    return out
