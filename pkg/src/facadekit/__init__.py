"""Facade label maps to symmetry-refined layouts, grammars, and 3D models.

The pipeline: decode a palette PNG into a label map, extract object
instances, score and refine their translational symmetry, re-rasterize,
derive a floor grammar, and emit an OBJ building model. Detection-style
loss references and a synthetic facade generator support testing the
pieces in isolation.
"""

from .config import PipelineConfig, load_config
from .exceptions import (
    AmbiguousColor,
    ConfigError,
    DimensionMismatch,
    DuplicateColor,
    FacadeError,
    InvalidElement,
    InvalidTemplate,
    LayoutOverflow,
    MissingTemplate,
    MissingWallBand,
    MissingWallClass,
    NoBackground,
    NoInstances,
    OutOfBounds,
    ParseFailure,
    UnknownClass,
    UnknownColor,
)
from .grammar import (
    Element,
    Floor,
    GrammarDoc,
    derive_bands,
    derive_floors,
    emit_grammar,
    load_grammar,
    sample_materials,
    save_grammar,
)
from .instances import (
    BBox,
    FacadeObject,
    connected_components,
    convex_hull,
    extract_corners,
    extract_instances,
    find_overlaps,
    min_bbox,
)
from .labelmap import (
    ClassPalette,
    PaletteEntry,
    decode_labelmap,
    default_palette,
    encode_labelmap,
    load_image,
    load_labelmap,
    load_palette,
    save_image,
    save_labelmap,
    save_palette,
    synth_palette,
    validate_labelmap,
)
from .losses import (
    DetectionTargets,
    LossWeights,
    corner_loss,
    cross_entropy,
    encode_targets,
    focal_loss,
    grad_check,
    offset_loss,
    one_hot,
    size_loss,
    total_loss,
)
from .mesh import (
    Mesh,
    MeshConfig,
    MeshGroup,
    Template,
    build_mesh,
    builtin_templates,
    export_obj,
    load_templates,
    place_template,
)
from .metrics import (
    ConfusionCounts,
    EvalReport,
    ablation,
    confusion,
    evaluate_pair,
    iou,
    pixel_accuracy,
    report_from_counts,
)
from .raster import clear_objects, default_draw_order, paint_rect, rasterize
from .symmetry import (
    HORIZONTAL,
    VERTICAL,
    GroupReport,
    RefinedLayout,
    SymmetryConfig,
    SymmetryGroup,
    SymmetryScore,
    aggregate_t,
    center_score,
    choose_axis,
    group_objects,
    refine,
    refine_layout,
    score,
    size_score,
)
from .synth import SynthSpec, generate, layout_objects

__version__ = "0.1.0"
