"""Parametric object extraction: connected components, hulls, boxes, corners.

Each detected instance is reduced to the parametric form used everywhere
downstream: a class id, a center, a size, and four extremal corner points.
Sizes count pixels — a component occupying columns 2..10 inclusive has
width 9 and center x 6.5 — so painting an extracted box back reproduces the
original pixels exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy import ndimage

from .labelmap import ClassPalette, validate_labelmap

__all__ = [
    "BBox",
    "FacadeObject",
    "connected_components",
    "convex_hull",
    "min_bbox",
    "extract_corners",
    "extract_instances",
    "find_overlaps",
]

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box over point coordinates; x1 <= x2, y1 <= y2."""

    x1: float
    y1: float
    x2: float
    y2: float

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1


@dataclass(frozen=True)
class FacadeObject:
    """One extracted instance.

    ``center`` may be sub-pixel; ``size`` counts pixels along each axis;
    ``corners`` are the four extremal component pixels ordered TL, TR, BR,
    BL. ``bbox`` spans the pixel squares (upper edges exclusive), so
    ``center == bbox midpoint`` and ``size == (bbox.width, bbox.height)``.
    """

    class_id: int
    center: tuple[float, float]
    size: tuple[float, float]
    corners: tuple[tuple[float, float], ...]
    pixel_count: int
    source_component: int = -1

    @property
    def bbox(self) -> BBox:
        cx, cy = self.center
        w, h = self.size
        return BBox(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)

    def moved(self, center: tuple[float, float], size: tuple[float, float]) -> "FacadeObject":
        """Copy with a new center/size; corners become the new box corners."""
        x1, y1 = center[0] - size[0] / 2.0, center[1] - size[1] / 2.0
        x2, y2 = center[0] + size[0] / 2.0, center[1] + size[1] / 2.0
        return replace(
            self,
            center=center,
            size=size,
            corners=((x1, y1), (x2, y1), (x2, y2), (x1, y2)),
        )


def connected_components(
    labelmap: np.ndarray, class_id: int, *, connectivity: int = 4
) -> list[np.ndarray]:
    """Split one class's pixels into maximal connected regions.

    Args:
        labelmap: (H, W) integer class-id grid.
        class_id: class to extract.
        connectivity: 4 (default) or 8.

    Returns:
        List of (n, 2) int arrays of (x, y) pixel coordinates, each in
        row-major order, components ordered by their top-left-most pixel.
    """
    labelmap = np.asarray(labelmap)
    mask = labelmap == class_id
    if not mask.any():
        return []
    structure = _FOUR_CONNECTED if connectivity == 4 else np.ones((3, 3), bool)
    labels, count = ndimage.label(mask, structure=structure)
    flat = labels.ravel()
    idx = np.flatnonzero(flat)
    order = np.argsort(flat[idx], kind="stable")  # stable keeps raster order
    sorted_idx = idx[order]
    bounds = np.searchsorted(flat[sorted_idx], np.arange(1, count + 1))
    width = labelmap.shape[1]
    comps = []
    for k in range(count):
        lo = bounds[k]
        hi = bounds[k + 1] if k + 1 < count else len(sorted_idx)
        lin = sorted_idx[lo:hi]
        ys, xs = np.divmod(lin, width)
        comps.append(np.column_stack([xs, ys]).astype(np.int64))
    comps.sort(key=lambda pts: (int(pts[0, 1]), int(pts[0, 0])))
    return comps


def _cross(o: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return float((a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]))


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Convex hull by monotone chain; counter-clockwise, collinear dropped.

    Degenerate inputs are returned as-is: a single point gives a 1-vertex
    polygon, collinear points give the 2-vertex end segment. Orientation is
    counter-clockwise in conventional axes (y up); in raster axes (y down)
    the same ordering traverses clockwise on screen.
    """
    pts = np.unique(np.asarray(points, dtype=np.float64), axis=0)
    if len(pts) == 1:
        return pts
    # np.unique sorts lexicographically by (x, y) already
    lower: list[np.ndarray] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[np.ndarray] = []
    for p in pts[::-1]:
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 2:  # all points collinear: keep the two extremes
        return np.array([pts[0], pts[-1]])
    return np.array(hull)


def min_bbox(hull: np.ndarray) -> BBox:
    """Tight axis-aligned box over polygon (or point-set) coordinates."""
    hull = np.asarray(hull, dtype=np.float64)
    if hull.size == 0:
        raise ValueError("min_bbox of an empty point set")
    return BBox(
        float(hull[:, 0].min()),
        float(hull[:, 1].min()),
        float(hull[:, 0].max()),
        float(hull[:, 1].max()),
    )


def extract_corners(
    points: np.ndarray, map_size: tuple[int, int]
) -> tuple[tuple[float, float], ...]:
    """Four extremal member points: nearest to each image corner.

    ``map_size`` is (width, height). For each of TL(0,0), TR(W-1,0),
    BR(W-1,H-1), BL(0,H-1) the member pixel with the least squared distance
    wins; ties break by smaller y, then smaller x.
    """
    pts = np.asarray(points, dtype=np.int64)
    w, h = int(map_size[0]), int(map_size[1])
    refs = ((0, 0), (w - 1, 0), (w - 1, h - 1), (0, h - 1))
    out = []
    for rx, ry in refs:
        d2 = (pts[:, 0] - rx) ** 2 + (pts[:, 1] - ry) ** 2
        best = np.lexsort((pts[:, 0], pts[:, 1], d2))[0]
        out.append((float(pts[best, 0]), float(pts[best, 1])))
    return tuple(out)


def extract_instances(
    labelmap: np.ndarray,
    palette: ClassPalette,
    min_area: int = 16,
    *,
    connectivity: int = 4,
) -> list[FacadeObject]:
    """Extract one FacadeObject per object-class component of >= min_area px.

    Output order is deterministic: ascending class id, then top-left-most
    component pixel.
    """
    labelmap = np.asarray(labelmap)
    validate_labelmap(labelmap, palette)
    height, width = labelmap.shape
    objects: list[FacadeObject] = []
    for class_id in sorted(palette.object_ids):
        for comp_idx, comp in enumerate(
            connected_components(labelmap, class_id, connectivity=connectivity)
        ):
            if len(comp) < min_area:
                continue
            hull = convex_hull(comp)
            box = min_bbox(hull)
            # pixel squares: max coordinate + 1 is the exclusive upper edge
            center = ((box.x1 + box.x2 + 1.0) / 2.0, (box.y1 + box.y2 + 1.0) / 2.0)
            size = (box.x2 - box.x1 + 1.0, box.y2 - box.y1 + 1.0)
            objects.append(
                FacadeObject(
                    class_id=class_id,
                    center=center,
                    size=size,
                    corners=extract_corners(comp, (width, height)),
                    pixel_count=len(comp),
                    source_component=comp_idx,
                )
            )
    return objects


def find_overlaps(objects: Sequence[FacadeObject]) -> set[int]:
    """Indices of objects whose bbox overlaps another object of a different class."""
    flagged: set[int] = set()
    for i, a in enumerate(objects):
        for j in range(i + 1, len(objects)):
            b = objects[j]
            if a.class_id == b.class_id:
                continue
            ab, bb = a.bbox, b.bbox
            if (
                ab.x1 < bb.x2
                and bb.x1 < ab.x2
                and ab.y1 < bb.y2
                and bb.y1 < ab.y2
            ):
                flagged.add(i)
                flagged.add(j)
    return flagged
