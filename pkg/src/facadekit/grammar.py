"""Floor-structured shape grammars: the bridge from 2D layouts to 3D.

A grammar describes a facade as horizontal bands (sky/roof at the top, shop
at the bottom, wall between) and a stack of floors inside the wall band,
each floor holding its elements as (class, x, y, w, h) tuples in pixel
coordinates (y down). Floors are derived from the window rows; index 0 is
the ground floor (largest y).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .exceptions import MissingWallBand, ParseFailure
from .instances import FacadeObject
from .labelmap import ClassPalette, validate_labelmap
from .symmetry import HORIZONTAL, group_objects

__all__ = [
    "Element",
    "Floor",
    "GrammarDoc",
    "derive_bands",
    "derive_floors",
    "sample_materials",
    "emit_grammar",
    "load_grammar",
    "save_grammar",
]

SCHEMA_VERSION = "v1"
DEFAULT_PIXEL_SCALE = 0.05  # meters per pixel
DEFAULT_GLASS_COLOR = (96, 160, 216)


@dataclass(frozen=True)
class Element:
    """One placed object: class name plus center (x, y) and size (w, h) in px."""

    class_name: str
    x: float
    y: float
    w: float
    h: float


@dataclass(frozen=True)
class Floor:
    """Horizontal slice of the wall band; index 0 is the ground floor."""

    index: int
    y_top: float
    y_bottom: float
    elements: tuple[Element, ...] = ()


@dataclass(frozen=True)
class GrammarDoc:
    extent: tuple[int, int]  # (W, H) pixels
    pixel_scale: float
    materials: dict[str, tuple[int, int, int]]
    bands: dict[str, tuple[float, float] | None]
    floors: tuple[Floor, ...]
    version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "extent": [int(self.extent[0]), int(self.extent[1])],
            "pixel_scale": self.pixel_scale,
            "materials": {k: list(v) for k, v in self.materials.items()},
            "bands": {
                k: (None if v is None else [v[0], v[1]])
                for k, v in self.bands.items()
            },
            "floors": [
                {
                    "index": f.index,
                    "y_top": f.y_top,
                    "y_bottom": f.y_bottom,
                    "elements": [
                        {
                            "class": e.class_name,
                            "x": e.x,
                            "y": e.y,
                            "w": e.w,
                            "h": e.h,
                        }
                        for e in f.elements
                    ],
                }
                for f in self.floors
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GrammarDoc":
        try:
            floors = tuple(
                Floor(
                    index=int(f["index"]),
                    y_top=float(f["y_top"]),
                    y_bottom=float(f["y_bottom"]),
                    elements=tuple(
                        Element(
                            class_name=str(e["class"]),
                            x=float(e["x"]),
                            y=float(e["y"]),
                            w=float(e["w"]),
                            h=float(e["h"]),
                        )
                        for e in f["elements"]
                    ),
                )
                for f in doc["floors"]
            )
            return cls(
                extent=(int(doc["extent"][0]), int(doc["extent"][1])),
                pixel_scale=float(doc["pixel_scale"]),
                materials={
                    k: (int(v[0]), int(v[1]), int(v[2]))
                    for k, v in doc["materials"].items()
                },
                bands={
                    k: (None if v is None else (float(v[0]), float(v[1])))
                    for k, v in doc["bands"].items()
                },
                floors=floors,
                version=str(doc.get("version", SCHEMA_VERSION)),
            )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ParseFailure(f"malformed grammar document: {exc}") from exc


def derive_bands(
    labelmap: np.ndarray, palette: ClassPalette
) -> dict[str, tuple[float, float] | None]:
    """Find the sky/roof prefix and shop suffix of the facade's rows.

    A row belongs to a band when its majority class is the band's class;
    sky rows are consumed from the top, then roof rows, and shop rows from
    the bottom. Whatever remains is the wall band; if nothing remains the
    facade has no wall to hang floors on.
    """
    labelmap = np.asarray(labelmap)
    validate_labelmap(labelmap, palette)
    height = labelmap.shape[0]
    majority = np.zeros(height, dtype=np.int64)
    for row in range(height):
        majority[row] = np.argmax(np.bincount(labelmap[row], minlength=palette.num_classes))

    def class_id(name: str) -> int | None:
        return palette.id_of(name) if palette.has_class(name) else None

    top = 0
    bands: dict[str, tuple[float, float] | None] = {"sky": None, "roof": None, "shop": None}
    for name in ("sky", "roof"):
        cid = class_id(name)
        if cid is None:
            continue
        start = top
        while top < height and majority[top] == cid:
            top += 1
        if top > start:
            bands[name] = (float(start), float(top))
    bottom = height
    shop_id = class_id("shop")
    if shop_id is not None:
        while bottom > top and majority[bottom - 1] == shop_id:
            bottom -= 1
        if bottom < height:
            bands["shop"] = (float(bottom), float(height))
    if top >= bottom:
        raise MissingWallBand("no rows left for the wall band")
    bands["wall"] = (float(top), float(bottom))
    return bands


def derive_floors(
    layout,
    labelmap: np.ndarray,
    palette: ClassPalette,
    gap_factor: float = 0.5,
) -> tuple[Floor, ...]:
    """Slice the wall band into floors at the midlines between window rows.

    Window row groups define the floors; each boundary sits midway between
    adjacent row centers, and the outermost floors run to the wall band
    edges. Every object lands on the floor containing its center y (objects
    clipped out of all floors attach to the nearest one). With no window
    rows at all, the whole wall band is one ground floor.
    """
    objects: Sequence[FacadeObject] = getattr(layout, "objects", layout)
    bands = derive_bands(labelmap, palette)
    wall_top, wall_bottom = bands["wall"]  # type: ignore[misc]

    window_id = palette.id_of("window") if palette.has_class("window") else None
    windows = [o for o in objects if o.class_id == window_id]
    row_centers: list[float] = []
    if windows:
        rows = group_objects(windows, HORIZONTAL, gap_factor)
        row_centers = sorted(
            float(np.mean([m.center[1] for m in g.members])) for g in rows
        )
    if row_centers:
        cuts = [wall_top]
        cuts += [
            (a + b) / 2.0 for a, b in zip(row_centers, row_centers[1:])
        ]
        cuts.append(wall_bottom)
    else:
        cuts = [wall_top, wall_bottom]

    spans = list(zip(cuts, cuts[1:]))  # top to bottom
    count = len(spans)
    members: list[list[Element]] = [[] for _ in spans]
    for obj in objects:
        cy = obj.center[1]
        chosen = None
        for k, (top, bottom) in enumerate(spans):
            if top <= cy < bottom:
                chosen = k
                break
        if chosen is None:  # center clipped out by a band: nearest floor
            chosen = min(
                range(count),
                key=lambda k: max(spans[k][0] - cy, cy - spans[k][1], 0.0),
            )
        members[chosen].append(
            Element(
                class_name=palette.name_of(obj.class_id),
                x=obj.center[0],
                y=obj.center[1],
                w=obj.size[0],
                h=obj.size[1],
            )
        )
    # ground floor is the bottom span; number upward
    floors = []
    for index, k in enumerate(reversed(range(count))):
        floors.append(
            Floor(
                index=index,
                y_top=spans[k][0],
                y_bottom=spans[k][1],
                elements=tuple(members[k]),
            )
        )
    return tuple(floors)


def sample_materials(
    image: np.ndarray | None,
    labelmap: np.ndarray,
    palette: ClassPalette,
    *,
    glass_color: tuple[int, int, int] = DEFAULT_GLASS_COLOR,
) -> dict[str, tuple[int, int, int]]:
    """Mean RGB of each class's pixels; windows get the glass color.

    Without an image (or for classes absent from the map) the palette color
    stands in as the default.
    """
    materials: dict[str, tuple[int, int, int]] = {}
    for entry in palette.entries:
        color = entry.color
        if image is not None:
            mask = labelmap == entry.class_id
            if mask.any():
                mean = np.asarray(image)[mask].mean(axis=0)
                color = tuple(int(round(c)) for c in mean)  # type: ignore[assignment]
        materials[entry.name] = color
    if "window" in materials:
        materials["window"] = tuple(int(c) for c in glass_color)  # type: ignore[assignment]
    return materials


def emit_grammar(
    layout,
    labelmap: np.ndarray,
    palette: ClassPalette,
    image: np.ndarray | None = None,
    *,
    pixel_scale: float = DEFAULT_PIXEL_SCALE,
    gap_factor: float = 0.5,
    glass_color: tuple[int, int, int] = DEFAULT_GLASS_COLOR,
) -> GrammarDoc:
    """Assemble the full grammar: bands, floors, elements, materials."""
    labelmap = np.asarray(labelmap)
    bands = derive_bands(labelmap, palette)
    floors = derive_floors(layout, labelmap, palette, gap_factor)
    height, width = labelmap.shape
    return GrammarDoc(
        extent=(int(width), int(height)),
        pixel_scale=float(pixel_scale),
        materials=sample_materials(image, labelmap, palette, glass_color=glass_color),
        bands={k: bands[k] for k in ("sky", "roof", "shop")},
        floors=floors,
    )


def save_grammar(doc: GrammarDoc, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc.to_dict(), indent=2, sort_keys=True) + "\n")


def load_grammar(path: str | Path) -> GrammarDoc:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseFailure(f"grammar {path}: invalid JSON ({exc})") from exc
    return GrammarDoc.from_dict(raw)
