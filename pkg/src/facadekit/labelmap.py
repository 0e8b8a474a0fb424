"""Palette-encoded segmentation rasters: the class palette, PNG I/O, codecs.

A label map is a plain ``(H, W)`` integer array of class ids. A facade image
is a ``(H, W, 3)`` uint8 RGB array. Both travel as PNG on disk; the palette
that interprets them is external JSON configuration, never hard-coded, so
datasets with different class sets load without code changes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np
from PIL import Image

from .exceptions import (
    AmbiguousColor,
    DuplicateColor,
    MissingWallClass,
    ParseFailure,
    UnknownClass,
    UnknownColor,
)

__all__ = [
    "PaletteEntry",
    "ClassPalette",
    "load_palette",
    "save_palette",
    "default_palette",
    "synth_palette",
    "decode_labelmap",
    "encode_labelmap",
    "load_image",
    "save_image",
    "load_labelmap",
    "save_labelmap",
    "validate_labelmap",
]


@dataclass(frozen=True)
class PaletteEntry:
    class_id: int
    name: str
    color: tuple[int, int, int]
    is_object: bool


@dataclass(frozen=True)
class ClassPalette:
    """Ordered, validated set of classes: id, name, RGB color, object flag.

    Ids must be unique and contiguous from 0, colors unique, and exactly one
    entry must be named ``wall`` (the background class). ``is_object`` marks
    the detectable instance classes (typically window, balcony, door).
    """

    entries: tuple[PaletteEntry, ...]

    def __post_init__(self) -> None:
        ids = [e.class_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise DuplicateColor(f"duplicate class ids in palette: {sorted(ids)}")
        if sorted(ids) != list(range(len(ids))):
            raise ParseFailure(
                f"class ids must be contiguous from 0, got {sorted(ids)}"
            )
        colors = [e.color for e in self.entries]
        if len(set(colors)) != len(colors):
            raise DuplicateColor("two palette classes share a color")
        walls = [e for e in self.entries if e.name == "wall"]
        if len(walls) != 1:
            raise MissingWallClass(
                f"palette needs exactly one 'wall' class, found {len(walls)}"
            )

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[PaletteEntry]:
        return iter(self.entries)

    @property
    def num_classes(self) -> int:
        return len(self.entries)

    @property
    def object_ids(self) -> tuple[int, ...]:
        return tuple(e.class_id for e in self.entries if e.is_object)

    @property
    def wall_id(self) -> int:
        return next(e.class_id for e in self.entries if e.name == "wall")

    def color_array(self) -> np.ndarray:
        """(num_classes, 3) uint8 row per class id."""
        out = np.zeros((self.num_classes, 3), dtype=np.uint8)
        for e in self.entries:
            out[e.class_id] = e.color
        return out

    def id_of(self, name: str) -> int:
        for e in self.entries:
            if e.name == name:
                return e.class_id
        raise UnknownClass(f"no class named {name!r} in palette")

    def name_of(self, class_id: int) -> str:
        for e in self.entries:
            if e.class_id == class_id:
                return e.name
        raise UnknownClass(f"class id {class_id} not in palette")

    def has_class(self, name: str) -> bool:
        return any(e.name == name for e in self.entries)


# Default colors are a documented convention of this package, chosen distinct
# and readable; annotation releases in the wild vary, hence external palettes.
_DEFAULT_ENTRIES = [
    (0, "window", (255, 0, 0), True),
    (1, "wall", (255, 255, 0), False),
    (2, "balcony", (128, 0, 128), True),
    (3, "door", (255, 128, 0), True),
    (4, "shop", (0, 255, 0), False),
    (5, "sky", (128, 255, 255), False),
    (6, "chimney", (128, 64, 0), False),
    (7, "roof", (0, 0, 255), False),
]


def default_palette() -> ClassPalette:
    """Eight-class facade palette (window/wall/balcony/door/shop/sky/chimney/roof)."""
    return ClassPalette(tuple(PaletteEntry(*row) for row in _DEFAULT_ENTRIES))


def synth_palette() -> ClassPalette:
    """Default palette plus a non-object ``vegetation`` class for occlusions."""
    rows = _DEFAULT_ENTRIES + [(8, "vegetation", (34, 139, 34), False)]
    return ClassPalette(tuple(PaletteEntry(*row) for row in rows))


def load_palette(path: str | Path) -> ClassPalette:
    """Load a palette from a JSON array of {id, name, color, object} objects."""
    raw = Path(path).read_text()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseFailure(f"palette {path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, list) or not doc:
        raise ParseFailure(f"palette {path}: expected a non-empty JSON array")
    entries = []
    for item in doc:
        try:
            color = tuple(int(c) for c in item["color"])
            entry = PaletteEntry(
                class_id=int(item["id"]),
                name=str(item["name"]),
                color=color,  # type: ignore[arg-type]
                is_object=bool(item["object"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseFailure(f"palette {path}: malformed entry {item!r}") from exc
        if len(entry.color) != 3 or any(not 0 <= c <= 255 for c in entry.color):
            raise ParseFailure(f"palette {path}: bad color {entry.color}")
        entries.append(entry)
    return ClassPalette(tuple(entries))


def save_palette(palette: ClassPalette, path: str | Path) -> None:
    doc = [
        {"id": e.class_id, "name": e.name, "color": list(e.color), "object": e.is_object}
        for e in palette.entries
    ]
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def _pack(rgb: np.ndarray) -> np.ndarray:
    """Pack (..., 3) uint8 into int32 r<<16 | g<<8 | b for exact lookup."""
    rgb = rgb.astype(np.int32)
    return (rgb[..., 0] << 16) | (rgb[..., 1] << 8) | rgb[..., 2]


def decode_labelmap(
    image: np.ndarray, palette: ClassPalette, *, nearest: bool = False
) -> np.ndarray:
    """Map an RGB image to a label map of class ids.

    Exact mode (default) requires every pixel to match a palette color
    bit-for-bit. ``nearest=True`` maps unmatched pixels to the palette color
    with the smallest squared RGB distance; an exact tie between two palette
    colors raises :class:`AmbiguousColor`.
    """
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ParseFailure(f"expected (H, W, 3) RGB array, got shape {image.shape}")
    colors = palette.color_array()
    ids = np.arange(palette.num_classes)

    packed_pal = _pack(colors)
    order = np.argsort(packed_pal)
    sorted_pal = packed_pal[order]
    flat = _pack(image).ravel()
    pos = np.searchsorted(sorted_pal, flat).clip(max=len(sorted_pal) - 1)
    matched = sorted_pal[pos] == flat
    out = ids[order][pos]

    if not matched.all():
        bad = np.flatnonzero(~matched)
        if not nearest:
            i = int(bad[0])
            y, x = divmod(i, image.shape[1])
            raise UnknownColor(
                f"pixel ({x},{y}) color {tuple(image[y, x])} not in palette"
            )
        # squared distances from each unmatched pixel to every palette color
        px = image.reshape(-1, 3)[bad].astype(np.int64)
        d2 = ((px[:, None, :] - colors[None, :, :].astype(np.int64)) ** 2).sum(axis=2)
        part = np.sort(d2, axis=1)
        ties = part[:, 0] == part[:, 1] if d2.shape[1] >= 2 else np.zeros(len(bad), bool)
        if ties.any():
            i = int(bad[np.flatnonzero(ties)[0]])
            y, x = divmod(i, image.shape[1])
            raise AmbiguousColor(
                f"pixel ({x},{y}) color {tuple(image[y, x])} equidistant "
                "from two palette colors"
            )
        out[bad] = np.argmin(d2, axis=1)
    return out.reshape(image.shape[:2])


def encode_labelmap(labelmap: np.ndarray, palette: ClassPalette) -> np.ndarray:
    """Render a label map back to RGB; inverse of :func:`decode_labelmap`."""
    labelmap = np.asarray(labelmap)
    validate_labelmap(labelmap, palette)
    return palette.color_array()[labelmap]


def validate_labelmap(labelmap: np.ndarray, palette: ClassPalette) -> None:
    if labelmap.ndim != 2 or labelmap.shape[0] < 1 or labelmap.shape[1] < 1:
        raise ParseFailure(f"label map must be 2-D and non-empty, got {labelmap.shape}")
    if not np.issubdtype(labelmap.dtype, np.integer):
        raise ParseFailure(f"label map dtype must be integer, got {labelmap.dtype}")
    lo, hi = int(labelmap.min()), int(labelmap.max())
    if lo < 0 or hi >= palette.num_classes:
        bad = lo if lo < 0 else hi
        raise UnknownClass(f"class id {bad} not in {palette.num_classes}-class palette")


def load_image(path: str | Path) -> np.ndarray:
    """Read a PNG (or any raster) as (H, W, 3) uint8, dropping alpha."""
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def save_image(image: np.ndarray, path: str | Path) -> None:
    arr = np.ascontiguousarray(np.asarray(image, dtype=np.uint8))
    Image.fromarray(arr, mode="RGB").save(path, format="PNG")


def load_labelmap(
    path: str | Path, palette: ClassPalette, *, nearest: bool = False
) -> np.ndarray:
    return decode_labelmap(load_image(path), palette, nearest=nearest)


def save_labelmap(labelmap: np.ndarray, palette: ClassPalette, path: str | Path) -> None:
    save_image(encode_labelmap(labelmap, palette), path)
