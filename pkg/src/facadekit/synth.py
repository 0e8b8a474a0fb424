"""Synthetic facade fixtures: a clean grid, a jittered copy, an occluded copy.

The ground truth is a regular window grid (optionally with balconies and a
door) on a wall background, so its symmetry scores are exactly zero. The
jittered variant perturbs every object's center and size independently with
integer-rounded truncated Gaussian noise; the occluded variant additionally
stamps vegetation-colored ellipses over the jittered map until the requested
pixel fraction is covered.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import LayoutOverflow
from .labelmap import ClassPalette, synth_palette
from .raster import paint_rect

__all__ = ["SynthSpec", "generate", "layout_objects"]

BALCONY_HEIGHT = 6
BALCONY_EXTRA_WIDTH = 6
BALCONY_GAP = 2  # rows between window bottom and balcony top
DOOR_WIDTH = 12
DOOR_HEIGHT = 18
DOOR_BOTTOM_MARGIN = 4
MIN_OBJECT_SIZE = 2  # jitter never shrinks an object below this
_TRUNCATE_SIGMAS = 3.0


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of one synthetic facade.

    ``jitter`` is the Gaussian sigma in pixels applied to the second output;
    ``occlusion`` is the minimum fraction of pixels the vegetation blobs in
    the third output must cover. Both default to off.
    """

    width: int = 160
    height: int = 200
    rows: int = 4
    cols: int = 4
    window_w: int = 14
    window_h: int = 18
    spacing_x: int = 34
    spacing_y: int = 40
    margin_top: int = 16
    jitter: float = 0.0
    occlusion: float = 0.0
    door: bool = True
    balcony: bool = False
    seed: int = 0


def layout_objects(spec: SynthSpec) -> list[tuple[int, tuple[float, float], tuple[float, float]]]:
    """Ground-truth objects as (class_id, center, size), in paint order.

    Balconies come first so windows and the door are painted over them,
    mirroring the default draw order of the rasterizer.
    """
    palette = synth_palette()
    window_id = palette.id_of("window")
    balcony_id = palette.id_of("balcony")
    door_id = palette.id_of("door")

    x0 = spec.width / 2.0 - (spec.cols - 1) * spec.spacing_x / 2.0
    y0 = spec.margin_top + spec.window_h / 2.0
    objects: list[tuple[int, tuple[float, float], tuple[float, float]]] = []
    if spec.balcony:
        for i in range(spec.rows):
            for j in range(spec.cols):
                cy = (
                    y0
                    + i * spec.spacing_y
                    + spec.window_h / 2.0
                    + BALCONY_GAP
                    + BALCONY_HEIGHT / 2.0
                )
                objects.append(
                    (
                        balcony_id,
                        (x0 + j * spec.spacing_x, cy),
                        (spec.window_w + BALCONY_EXTRA_WIDTH, BALCONY_HEIGHT),
                    )
                )
    if spec.door:
        objects.append(
            (
                door_id,
                (spec.width / 2.0, spec.height - DOOR_BOTTOM_MARGIN - DOOR_HEIGHT / 2.0),
                (DOOR_WIDTH, DOOR_HEIGHT),
            )
        )
    for i in range(spec.rows):
        for j in range(spec.cols):
            objects.append(
                (
                    window_id,
                    (x0 + j * spec.spacing_x, y0 + i * spec.spacing_y),
                    (spec.window_w, spec.window_h),
                )
            )
    return objects


def _validate_layout(spec: SynthSpec) -> None:
    if spec.rows < 1 or spec.cols < 1:
        raise LayoutOverflow("need at least one window row and column")
    if min(spec.window_w, spec.window_h) < MIN_OBJECT_SIZE:
        raise LayoutOverflow("window size below minimum")
    # clearance: jitter can move a center 3 sigma and grow each side 1.5 sigma
    c = 0.0 if spec.jitter <= 0 else 4.5 * spec.jitter
    x0 = spec.width / 2.0 - (spec.cols - 1) * spec.spacing_x / 2.0
    y0 = spec.margin_top + spec.window_h / 2.0
    widest = spec.window_w + (BALCONY_EXTRA_WIDTH if spec.balcony else 0)

    if x0 - widest / 2.0 - c < 0:
        raise LayoutOverflow("grid runs off the left edge")
    if x0 + (spec.cols - 1) * spec.spacing_x + widest / 2.0 + c > spec.width:
        raise LayoutOverflow("grid runs off the right edge")
    if y0 - spec.window_h / 2.0 - c < 0:
        raise LayoutOverflow("grid runs off the top edge")

    column_pitch_needed = widest + 2 * c + 1
    if spec.cols > 1 and spec.spacing_x < column_pitch_needed:
        raise LayoutOverflow(
            f"column spacing {spec.spacing_x} < {column_pitch_needed:.1f} needed"
        )
    row_extent = spec.window_h + (
        BALCONY_GAP + BALCONY_HEIGHT if spec.balcony else 0
    )
    if spec.rows > 1 and spec.spacing_y < row_extent + 2 * c + 1:
        raise LayoutOverflow(
            f"row spacing {spec.spacing_y} < {row_extent + 2 * c + 1:.1f} needed"
        )

    bottom = y0 + (spec.rows - 1) * spec.spacing_y + spec.window_h / 2.0
    if spec.balcony:
        bottom += BALCONY_GAP + BALCONY_HEIGHT
    floor_limit = spec.height
    if spec.door:
        floor_limit = spec.height - DOOR_BOTTOM_MARGIN - DOOR_HEIGHT - 2
        if DOOR_WIDTH + 2 > spec.width:
            raise LayoutOverflow("door wider than the facade")
    if bottom + c > floor_limit:
        raise LayoutOverflow("grid runs into the bottom of the facade")


def _jittered(
    objects: list[tuple[int, tuple[float, float], tuple[float, float]]],
    sigma: float,
    rng: np.random.Generator,
) -> list[tuple[int, tuple[float, float], tuple[float, float]]]:
    out = []
    for class_id, center, size in objects:
        delta = rng.normal(0.0, sigma, size=4) if sigma > 0 else np.zeros(4)
        delta = np.round(np.clip(delta, -_TRUNCATE_SIGMAS * sigma, _TRUNCATE_SIGMAS * sigma))
        out.append(
            (
                class_id,
                (center[0] + delta[0], center[1] + delta[1]),
                (
                    max(MIN_OBJECT_SIZE, size[0] + delta[2]),
                    max(MIN_OBJECT_SIZE, size[1] + delta[3]),
                ),
            )
        )
    return out


def _paint(objects, width: int, height: int, wall_id: int) -> np.ndarray:
    out = np.full((height, width), wall_id, dtype=np.int64)
    for class_id, center, size in objects:
        paint_rect(out, class_id, center, size)
    return out


def _occlude(
    labelmap: np.ndarray,
    fraction: float,
    vegetation_id: int,
    rng: np.random.Generator,
) -> np.ndarray:
    out = labelmap.copy()
    height, width = out.shape
    target = int(round(fraction * out.size))
    yy, xx = np.ogrid[:height, :width]
    max_semi = max(4.0, width / 10.0)
    for _ in range(10_000):
        if int((out == vegetation_id).sum()) >= target:
            break
        cx = rng.uniform(0, width)
        cy = rng.uniform(0, height)
        a = rng.uniform(3.0, max_semi)
        b = rng.uniform(3.0, max_semi)
        mask = ((xx - cx) / a) ** 2 + ((yy - cy) / b) ** 2 <= 1.0
        out[mask] = vegetation_id
    return out


def generate(spec: SynthSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (truth, jittered, occluded) label maps for one spec.

    All three share ``spec.seed``; with jitter and occlusion at zero the
    three maps are identical. Raises LayoutOverflow before painting anything
    if the grid (plus jitter clearance) cannot fit.
    """
    _validate_layout(spec)
    palette: ClassPalette = synth_palette()
    wall_id = palette.wall_id
    vegetation_id = palette.id_of("vegetation")

    objects = layout_objects(spec)
    truth = _paint(objects, spec.width, spec.height, wall_id)

    rng = np.random.default_rng(spec.seed)
    jittered_objects = _jittered(objects, spec.jitter, rng)
    jittered = _paint(jittered_objects, spec.width, spec.height, wall_id)

    if spec.occlusion > 0:
        occluded = _occlude(jittered, spec.occlusion, vegetation_id, rng)
    else:
        occluded = jittered.copy()
    return truth, jittered, occluded
