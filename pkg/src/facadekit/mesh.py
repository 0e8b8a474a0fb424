"""Procedural 3D building geometry from a grammar, with OBJ/MTL export.

World frame: X right, Y up, Z out of the facade (the facade front lies in
the z=0 plane, walls extend to negative z). Raster y is flipped during
placement. Element templates are normalized to the unit cube and scaled to
(w·pixel_scale, h·pixel_scale, depth); inset templates sit behind the
facade plane, protruding ones in front of it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import (
    InvalidElement,
    InvalidTemplate,
    MissingTemplate,
    ParseFailure,
)
from .grammar import Element, GrammarDoc

__all__ = [
    "Template",
    "MeshGroup",
    "Mesh",
    "MeshConfig",
    "builtin_templates",
    "load_templates",
    "place_template",
    "build_mesh",
    "export_obj",
]

MIN_TRIANGLE_AREA = 1e-12  # square meters

# Outward-wound triangle fan for a box spanning vertex order:
# 0..3 back face (z=min), 4..7 front face (z=max), both x0y0, x1y0, x1y1, x0y1.
_BOX_TRIS = (
    (4, 5, 6), (4, 6, 7),  # front  +z
    (1, 0, 3), (1, 3, 2),  # back   -z
    (0, 4, 7), (0, 7, 3),  # left   -x
    (5, 1, 2), (5, 2, 6),  # right  +x
    (0, 1, 5), (0, 5, 4),  # bottom -y
    (7, 6, 2), (7, 2, 3),  # top    +y
)
_OPEN_BOX_TRIS = _BOX_TRIS[2:]  # no front face


def _box_vertices(lo: tuple[float, float, float], hi: tuple[float, float, float]) -> np.ndarray:
    x0, y0, z0 = lo
    x1, y1, z1 = hi
    return np.array(
        [
            (x0, y0, z0), (x1, y0, z0), (x1, y1, z0), (x0, y1, z0),
            (x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1),
        ],
        dtype=np.float64,
    )


@dataclass(frozen=True)
class Template:
    """Element geometry normalized to [0,1]^3, scaled at placement time.

    ``depth`` is the template's z extent in meters. Inset templates are
    placed behind the facade plane (z in [-depth, 0]), protruding ones in
    front (z in [0, depth]).
    """

    class_name: str
    vertices: np.ndarray
    triangles: np.ndarray
    depth: float
    inset: bool
    material: str

    def validate(self) -> None:
        v = np.asarray(self.vertices, dtype=np.float64)
        t = np.asarray(self.triangles)
        if v.ndim != 2 or v.shape[1] != 3 or len(v) < 3:
            raise InvalidTemplate(f"{self.class_name}: bad vertex array {v.shape}")
        if not np.isfinite(v).all():
            raise InvalidTemplate(f"{self.class_name}: non-finite vertex")
        for axis in range(3):
            lo, hi = v[:, axis].min(), v[:, axis].max()
            if abs(lo) > 1e-9 or abs(hi - 1.0) > 1e-9:
                raise InvalidTemplate(
                    f"{self.class_name}: axis {axis} spans [{lo}, {hi}], not [0, 1]"
                )
        if t.ndim != 2 or t.shape[1] != 3:
            raise InvalidTemplate(f"{self.class_name}: bad triangle array {t.shape}")
        if t.min() < 0 or t.max() >= len(v):
            raise InvalidTemplate(f"{self.class_name}: triangle index out of range")
        if self.depth <= 0:
            raise InvalidTemplate(f"{self.class_name}: nonpositive depth")


def _window_template() -> Template:
    # open box (frame and reveal) plus an interior glass pane
    verts = _box_vertices((0, 0, 0), (1, 1, 1))
    m, zg = 0.08, 0.55
    glass = np.array(
        [(m, m, zg), (1 - m, m, zg), (1 - m, 1 - m, zg), (m, 1 - m, zg)],
        dtype=np.float64,
    )
    tris = list(_OPEN_BOX_TRIS) + [(8, 9, 10), (8, 10, 11)]
    return Template(
        class_name="window",
        vertices=np.vstack([verts, glass]),
        triangles=np.array(tris, dtype=np.int64),
        depth=0.15,
        inset=True,
        material="window",
    )


def _door_template() -> Template:
    return Template(
        class_name="door",
        vertices=_box_vertices((0, 0, 0), (1, 1, 1)),
        triangles=np.array(_BOX_TRIS, dtype=np.int64),
        depth=0.12,
        inset=True,
        material="door",
    )


def _balcony_template() -> Template:
    # floor slab plus three railing bars; the top bar closes the unit extent
    parts = [
        _box_vertices((0, 0.0, 0), (1, 0.45, 1)),
        _box_vertices((0, 0.58, 0.86), (1, 0.66, 1)),
        _box_vertices((0, 0.76, 0.86), (1, 0.84, 1)),
        _box_vertices((0, 0.94, 0.86), (1, 1.0, 1)),
    ]
    verts = np.vstack(parts)
    tris = np.vstack(
        [np.array(_BOX_TRIS, dtype=np.int64) + 8 * k for k in range(len(parts))]
    )
    return Template(
        class_name="balcony",
        vertices=verts,
        triangles=tris,
        depth=0.3,
        inset=False,
        material="balcony",
    )


def builtin_templates() -> dict[str, Template]:
    """Default window/door/balcony templates."""
    templates = {
        "window": _window_template(),
        "door": _door_template(),
        "balcony": _balcony_template(),
    }
    for tpl in templates.values():
        tpl.validate()
    return templates


def load_templates(path: str | Path) -> dict[str, Template]:
    """Load a template library from JSON, overriding built-ins per class.

    Schema: {class: {"vertices": [[x,y,z]...], "triangles": [[a,b,c]...],
    "depth": meters, "inset": bool, "material": name}}.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseFailure(f"templates {path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ParseFailure(f"templates {path}: expected an object keyed by class")
    templates = builtin_templates()
    for name, spec in doc.items():
        try:
            tpl = Template(
                class_name=name,
                vertices=np.array(spec["vertices"], dtype=np.float64),
                triangles=np.array(spec["triangles"], dtype=np.int64),
                depth=float(spec["depth"]),
                inset=bool(spec.get("inset", True)),
                material=str(spec.get("material", name)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseFailure(f"templates {path}: malformed entry {name!r}") from exc
        tpl.validate()
        templates[name] = tpl
    return templates


@dataclass(frozen=True)
class MeshGroup:
    name: str
    material: str
    tri_start: int
    tri_count: int


@dataclass(frozen=True)
class Mesh:
    vertices: np.ndarray  # (V, 3) meters
    triangles: np.ndarray  # (T, 3) int
    groups: tuple[MeshGroup, ...]

    def validate(self) -> None:
        if not np.isfinite(self.vertices).all():
            raise InvalidTemplate("mesh holds non-finite vertices")
        if len(self.triangles) and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise InvalidTemplate("mesh holds out-of-range triangle indices")
        areas = self.triangle_areas()
        if len(areas) and areas.min() <= MIN_TRIANGLE_AREA:
            raise InvalidTemplate(f"mesh holds a degenerate triangle ({areas.min()} m^2)")

    def triangle_areas(self) -> np.ndarray:
        if not len(self.triangles):
            return np.zeros(0)
        a = self.vertices[self.triangles[:, 0]]
        b = self.vertices[self.triangles[:, 1]]
        c = self.vertices[self.triangles[:, 2]]
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    def group_bounds(self, group: MeshGroup) -> tuple[np.ndarray, np.ndarray]:
        """(min_xyz, max_xyz) over the vertices the group's triangles touch."""
        tris = self.triangles[group.tri_start : group.tri_start + group.tri_count]
        used = self.vertices[np.unique(tris)]
        return used.min(axis=0), used.max(axis=0)


@dataclass(frozen=True)
class MeshConfig:
    wall_depth: float = 0.2
    roof_pitch_deg: float = 30.0
    balcony_area_factor: float = 0.25


def place_template(
    template: Template,
    element: Element,
    pixel_scale: float,
    facade_height_px: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Scale a template to an element and drop it onto the facade plane.

    Returns (vertices, triangles). The element's raster-y center flips to
    world y; the returned fragment spans exactly w·s × h·s in X/Y.
    """
    if element.w <= 0 or element.h <= 0:
        raise InvalidElement(
            f"{element.class_name} at ({element.x}, {element.y}) has "
            f"nonpositive size ({element.w}, {element.h})"
        )
    s = pixel_scale
    scale = np.array([element.w * s, element.h * s, template.depth])
    shift = np.array(
        [
            (element.x - element.w / 2.0) * s,
            (facade_height_px - (element.y + element.h / 2.0)) * s,
            -template.depth if template.inset else 0.0,
        ]
    )
    return template.vertices * scale + shift, template.triangles.copy()


def _roof_wedge(width_m: float, band_lo_m: float, band_hi_m: float, pitch_deg: float):
    """Sloped prism leaning back from the facade plane over the roof band."""
    rise = band_hi_m - band_lo_m
    run = rise / math.tan(math.radians(pitch_deg))
    verts = np.array(
        [
            (0, 0, 0), (1, 0, 0), (1, 0, 1), (0, 0, 1),  # bottom, back to front
            (0, 1, 0), (1, 1, 0),  # top edge at the back
        ],
        dtype=np.float64,
    )
    tris = np.array(
        [
            (0, 1, 2), (0, 2, 3),  # bottom -y
            (0, 4, 5), (0, 5, 1),  # back   -z
            (3, 2, 5), (3, 5, 4),  # slope
            (0, 3, 4),  # left
            (1, 5, 2),  # right
        ],
        dtype=np.int64,
    )
    verts = verts * np.array([width_m, rise, run]) + np.array([0.0, band_lo_m, -run])
    return verts, tris


class _Builder:
    def __init__(self) -> None:
        self.vertices: list[np.ndarray] = []
        self.triangles: list[np.ndarray] = []
        self.groups: list[MeshGroup] = []
        self._vcount = 0
        self._tcount = 0

    def add(self, name: str, material: str, verts: np.ndarray, tris: np.ndarray) -> None:
        self.vertices.append(verts)
        self.triangles.append(np.asarray(tris, dtype=np.int64) + self._vcount)
        self.groups.append(MeshGroup(name, material, self._tcount, len(tris)))
        self._vcount += len(verts)
        self._tcount += len(tris)

    def finish(self) -> Mesh:
        mesh = Mesh(
            vertices=np.vstack(self.vertices) if self.vertices else np.zeros((0, 3)),
            triangles=np.vstack(self.triangles) if self.triangles else np.zeros((0, 3), np.int64),
            groups=tuple(self.groups),
        )
        mesh.validate()
        return mesh


def build_mesh(
    grammar: GrammarDoc,
    templates: dict[str, Template] | None = None,
    config: MeshConfig | None = None,
) -> Mesh:
    """Assemble the building: wall slab per floor, bands, then elements.

    Balconies smaller than ``balcony_area_factor`` times the median balcony
    area are dropped. Every band and every retained element becomes one
    named group, in deterministic grammar order.
    """
    templates = templates or builtin_templates()
    cfg = config or MeshConfig()
    s = grammar.pixel_scale
    width_px, height_px = grammar.extent
    width_m = width_px * s
    builder = _Builder()

    def world_y(y_px: float) -> float:
        return (height_px - y_px) * s

    for floor in grammar.floors:
        verts = _box_vertices(
            (0.0, world_y(floor.y_bottom), -cfg.wall_depth),
            (width_m, world_y(floor.y_top), 0.0),
        )
        builder.add(f"floor_{floor.index:02d}", "wall", verts, np.array(_BOX_TRIS))

    shop = grammar.bands.get("shop")
    if shop is not None:
        verts = _box_vertices(
            (0.0, world_y(shop[1]), -cfg.wall_depth),
            (width_m, world_y(shop[0]), 0.0),
        )
        builder.add("shop", "shop", verts, np.array(_BOX_TRIS))

    roof = grammar.bands.get("roof")
    if roof is not None:
        verts, tris = _roof_wedge(
            width_m, world_y(roof[1]), world_y(roof[0]), cfg.roof_pitch_deg
        )
        builder.add("roof", "roof", verts, tris)

    balcony_areas = [
        e.w * e.h
        for floor in grammar.floors
        for e in floor.elements
        if e.class_name == "balcony"
    ]
    balcony_cutoff = (
        cfg.balcony_area_factor * float(np.median(balcony_areas))
        if balcony_areas
        else 0.0
    )

    counters: dict[str, int] = {}
    for floor in grammar.floors:
        for element in floor.elements:
            if element.class_name == "balcony" and element.w * element.h < balcony_cutoff:
                continue
            template = templates.get(element.class_name)
            if template is None:
                raise MissingTemplate(f"no template for class {element.class_name!r}")
            verts, tris = place_template(template, element, s, height_px)
            k = counters.get(element.class_name, 0)
            counters[element.class_name] = k + 1
            builder.add(f"{element.class_name}_{k:03d}", template.material, verts, tris)
    return builder.finish()


def export_obj(
    mesh: Mesh,
    materials: dict[str, tuple[int, int, int]],
    path: str | Path,
) -> tuple[Path, Path]:
    """Write OBJ + sibling MTL; byte-deterministic for identical inputs.

    Vertices come first (6 decimal places), then per-group ``o``/``usemtl``
    blocks with 1-based ``f`` records. The MTL lists materials in first-use
    order with Kd normalized to [0, 1].
    """
    obj_path = Path(path).with_suffix(".obj")
    mtl_path = obj_path.with_suffix(".mtl")

    used: list[str] = []
    for group in mesh.groups:
        if group.material not in used:
            used.append(group.material)
    missing = [m for m in used if m not in materials]
    if missing:
        raise MissingTemplate(f"no material color for {missing}")

    mtl_lines = []
    for name in used:
        r, g, b = materials[name]
        mtl_lines.append(f"newmtl {name}")
        mtl_lines.append(f"Kd {r / 255.0:.6f} {g / 255.0:.6f} {b / 255.0:.6f}")
    mtl_path.write_text("\n".join(mtl_lines) + "\n")

    lines = [f"mtllib {mtl_path.name}"]
    for x, y, z in mesh.vertices:
        lines.append(f"v {x:.6f} {y:.6f} {z:.6f}")
    for group in mesh.groups:
        lines.append(f"o {group.name}")
        lines.append(f"usemtl {group.material}")
        tris = mesh.triangles[group.tri_start : group.tri_start + group.tri_count]
        for a, b, c in tris:
            lines.append(f"f {a + 1} {b + 1} {c + 1}")
    obj_path.write_text("\n".join(lines) + "\n")
    return obj_path, mtl_path
