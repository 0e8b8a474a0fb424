"""Error types shared across the pipeline."""

from __future__ import annotations

__all__ = [
    "FacadeError",
    "ParseFailure",
    "DuplicateColor",
    "MissingWallClass",
    "UnknownColor",
    "AmbiguousColor",
    "UnknownClass",
    "DimensionMismatch",
    "NoBackground",
    "NoInstances",
    "OutOfBounds",
    "MissingWallBand",
    "MissingTemplate",
    "InvalidTemplate",
    "InvalidElement",
    "LayoutOverflow",
    "ConfigError",
]


class FacadeError(Exception):
    """Base class for every error raised by this package."""


class ParseFailure(FacadeError):
    """A palette/grammar/template file could not be parsed."""


class DuplicateColor(FacadeError):
    """Palette entries share a color or a class id."""


class MissingWallClass(FacadeError):
    """Palette has no entry named 'wall'."""


class UnknownColor(FacadeError):
    """A pixel color has no exact palette match (exact decode mode)."""


class AmbiguousColor(FacadeError):
    """A pixel is equidistant from two palette colors (nearest decode mode)."""


class UnknownClass(FacadeError):
    """A label map holds a class id absent from the palette."""


class DimensionMismatch(FacadeError):
    """Two rasters that must share a shape do not."""


class NoBackground(FacadeError):
    """Every pixel belongs to an object class; nothing to fill from."""


class NoInstances(FacadeError):
    """An operation that normalizes by instance count got zero instances."""


class OutOfBounds(FacadeError):
    """An object center lies outside the image."""


class MissingWallBand(FacadeError):
    """Band derivation left no rows for the wall band."""


class MissingTemplate(FacadeError):
    """No mesh template registered for an element class."""


class InvalidTemplate(FacadeError):
    """A mesh template violates its normalization or index contract."""


class InvalidElement(FacadeError):
    """A grammar element has a nonpositive size."""


class LayoutOverflow(FacadeError):
    """A synthetic layout does not fit its canvas after maximal jitter."""


class ConfigError(FacadeError):
    """Configuration failed validation (unknown key or out-of-range value)."""
