"""Run configuration: defaults, TOML file loading, flag overrides.

One flat dataclass backs every pipeline stage. A config file groups the
same fields into TOML sections ([symmetry], [raster], [grammar], [mesh],
[losses]); command-line flags override file values. Unknown sections or
keys are rejected rather than ignored so typos fail loudly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .exceptions import ConfigError
from .labelmap import ClassPalette
from .losses import LossWeights
from .mesh import MeshConfig
from .symmetry import SymmetryConfig

__all__ = ["PipelineConfig", "load_config"]


@dataclass(frozen=True)
class PipelineConfig:
    # inputs
    palette: str | None = None
    min_area: int = 16
    # symmetry
    gap_factor: float = 0.5
    sigmoid_tau_mode: str = "median-diagonal"
    sigmoid_tau: float = 1.0
    sigmoid_shift: float = 4.0
    squared_spacing: bool = True
    literal_center_blend: bool = False
    symmetry_classes: tuple[str, ...] | None = None
    # raster
    draw_order: tuple[str, ...] | None = None
    # grammar
    pixel_scale: float = 0.05
    grammar_gap_factor: float = 0.5
    # mesh
    wall_depth: float = 0.2
    roof_pitch_deg: float = 30.0
    balcony_area_factor: float = 0.25
    # losses
    alpha: float = 2.0
    beta: float = 4.0
    stride: int = 4
    lambda_det: float = 1.0
    lambda_size: float = 1.0
    lambda_offset: float = 1.0
    lambda_corner: float = 1.0

    def validate(self) -> None:
        checks = [
            (self.min_area >= 0, "min_area must be >= 0"),
            (self.gap_factor > 0, "symmetry.gap_factor must be > 0"),
            (
                self.sigmoid_tau_mode in ("median-diagonal", "fixed"),
                "symmetry.sigmoid_tau_mode must be 'median-diagonal' or 'fixed'",
            ),
            (self.sigmoid_tau > 0, "symmetry.sigmoid_tau must be > 0"),
            (math.isfinite(self.sigmoid_shift), "symmetry.sigmoid_shift must be finite"),
            (self.pixel_scale > 0, "grammar.pixel_scale must be > 0"),
            (self.grammar_gap_factor > 0, "grammar.gap_factor must be > 0"),
            (self.wall_depth > 0, "mesh.wall_depth must be > 0"),
            (0 < self.roof_pitch_deg < 90, "mesh.roof_pitch_deg must be in (0, 90)"),
            (self.balcony_area_factor >= 0, "mesh.balcony_area_factor must be >= 0"),
            (self.alpha > 0, "losses.alpha must be > 0"),
            (self.beta >= 0, "losses.beta must be >= 0"),
            (self.stride >= 1, "losses.stride must be >= 1"),
            (self.lambda_det >= 0, "losses.lambda_det must be >= 0"),
            (self.lambda_size >= 0, "losses.lambda_size must be >= 0"),
            (self.lambda_offset >= 0, "losses.lambda_offset must be >= 0"),
            (self.lambda_corner >= 0, "losses.lambda_corner must be >= 0"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)

    def with_overrides(self, **overrides) -> "PipelineConfig":
        """New config with the non-None overrides applied, then revalidated."""
        changed = {k: v for k, v in overrides.items() if v is not None}
        bad = [k for k in changed if k not in _FIELD_NAMES]
        if bad:
            raise ConfigError(f"unknown config fields: {bad}")
        merged = replace(self, **changed)
        merged.validate()
        return merged

    def symmetry_config(self, palette: ClassPalette | None = None) -> SymmetryConfig:
        class_ids: tuple[int, ...] | None = None
        if self.symmetry_classes is not None:
            if palette is None:
                raise ConfigError("symmetry class filter needs a palette to resolve names")
            class_ids = tuple(palette.id_of(name) for name in self.symmetry_classes)
        return SymmetryConfig(
            gap_factor=self.gap_factor,
            sigmoid_shift=self.sigmoid_shift,
            tau_mode=self.sigmoid_tau_mode,
            tau_value=self.sigmoid_tau,
            squared_spacing=self.squared_spacing,
            literal_center_blend=self.literal_center_blend,
            classes=class_ids,
        )

    def mesh_config(self) -> MeshConfig:
        return MeshConfig(
            wall_depth=self.wall_depth,
            roof_pitch_deg=self.roof_pitch_deg,
            balcony_area_factor=self.balcony_area_factor,
        )

    def loss_weights(self) -> LossWeights:
        return LossWeights(
            lambda_det=self.lambda_det,
            lambda_size=self.lambda_size,
            lambda_offset=self.lambda_offset,
            lambda_corner=self.lambda_corner,
        )

    def draw_order_ids(self, palette: ClassPalette) -> tuple[int, ...] | None:
        if self.draw_order is None:
            return None
        return tuple(palette.id_of(name) for name in self.draw_order)

    def echo(self) -> dict:
        """Sectioned dict mirroring the TOML layout, for run reports."""
        return {
            "palette": self.palette,
            "min_area": self.min_area,
            "symmetry": {
                "gap_factor": self.gap_factor,
                "sigmoid_tau_mode": self.sigmoid_tau_mode,
                "sigmoid_tau": self.sigmoid_tau,
                "sigmoid_shift": self.sigmoid_shift,
                "squared_spacing": self.squared_spacing,
                "literal_center_blend": self.literal_center_blend,
                "classes": list(self.symmetry_classes) if self.symmetry_classes else None,
            },
            "raster": {
                "draw_order": list(self.draw_order) if self.draw_order else None,
            },
            "grammar": {
                "pixel_scale": self.pixel_scale,
                "gap_factor": self.grammar_gap_factor,
            },
            "mesh": {
                "wall_depth": self.wall_depth,
                "roof_pitch_deg": self.roof_pitch_deg,
                "balcony_area_factor": self.balcony_area_factor,
            },
            "losses": {
                "alpha": self.alpha,
                "beta": self.beta,
                "stride": self.stride,
                "lambda_det": self.lambda_det,
                "lambda_size": self.lambda_size,
                "lambda_offset": self.lambda_offset,
                "lambda_corner": self.lambda_corner,
            },
        }


_FIELD_NAMES = {f.name for f in fields(PipelineConfig)}

# (section, key) -> (field name, coercion)
_SCHEMA: dict[tuple[str, str], tuple[str, type | str]] = {
    ("", "palette"): ("palette", str),
    ("", "min_area"): ("min_area", int),
    ("symmetry", "gap_factor"): ("gap_factor", float),
    ("symmetry", "sigmoid_tau_mode"): ("sigmoid_tau_mode", str),
    ("symmetry", "sigmoid_tau"): ("sigmoid_tau", float),
    ("symmetry", "sigmoid_shift"): ("sigmoid_shift", float),
    ("symmetry", "squared_spacing"): ("squared_spacing", bool),
    ("symmetry", "literal_center_blend"): ("literal_center_blend", bool),
    ("symmetry", "classes"): ("symmetry_classes", "strlist"),
    ("raster", "draw_order"): ("draw_order", "strlist"),
    ("grammar", "pixel_scale"): ("pixel_scale", float),
    ("grammar", "gap_factor"): ("grammar_gap_factor", float),
    ("mesh", "wall_depth"): ("wall_depth", float),
    ("mesh", "roof_pitch_deg"): ("roof_pitch_deg", float),
    ("mesh", "balcony_area_factor"): ("balcony_area_factor", float),
    ("losses", "alpha"): ("alpha", float),
    ("losses", "beta"): ("beta", float),
    ("losses", "stride"): ("stride", int),
    ("losses", "lambda_det"): ("lambda_det", float),
    ("losses", "lambda_size"): ("lambda_size", float),
    ("losses", "lambda_offset"): ("lambda_offset", float),
    ("losses", "lambda_corner"): ("lambda_corner", float),
}


def _coerce(section: str, key: str, value, kind) -> object:
    where = f"[{section}] {key}" if section else key
    if kind == "strlist":
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ConfigError(f"{where} must be a list of strings")
        return tuple(value)
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be a boolean")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{where} must be a string")
    return value


def load_config(path: str | Path | None) -> PipelineConfig:
    """Parse a TOML config; ``None`` returns the defaults."""
    if path is None:
        config = PipelineConfig()
        config.validate()
        return config
    try:
        doc = tomllib.loads(Path(path).read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config {path}: {exc}") from exc

    values: dict[str, object] = {}

    def take(section: str, key: str, value) -> None:
        spec = _SCHEMA.get((section, key))
        if spec is None:
            where = f"[{section}] {key}" if section else key
            raise ConfigError(f"config {path}: unknown key {where}")
        name, kind = spec
        values[name] = _coerce(section, key, value, kind)

    for key, value in doc.items():
        if isinstance(value, dict):
            if key not in ("symmetry", "raster", "grammar", "mesh", "losses"):
                raise ConfigError(f"config {path}: unknown section [{key}]")
            for sub, subvalue in value.items():
                take(key, sub, subvalue)
        else:
            take("", key, value)

    config = PipelineConfig(**values)
    config.validate()
    return config
