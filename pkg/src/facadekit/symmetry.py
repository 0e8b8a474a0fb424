"""Translational-symmetry scoring and layout refinement.

Facade elements of one class tend to repeat on a regular grid: centers of a
row are collinear and evenly spaced, and sizes match. The score ``t`` of a
group measures how far it deviates from that ideal (in squared pixels):

    t = t_c + t_s
    t_c = variance of the orthogonal center coordinate
          + variance of the consecutive center gaps along the group axis
    t_s = variance of widths + variance of heights

A squashed score ``t_tilde = sigmoid(t / tau - c)`` in (0, 1) then drives a
blend: every refined quantity is ``t_tilde * original + (1 - t_tilde) *
target``, where the target is the group mean (orthogonal coordinate, sizes)
or the mean-anchored equal-spacing sequence (coordinate along the group
axis). Near-regular groups therefore snap almost fully to the regular grid,
while wildly irregular groups are left essentially untouched.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

from .instances import FacadeObject

__all__ = [
    "HORIZONTAL",
    "VERTICAL",
    "SymmetryConfig",
    "SymmetryGroup",
    "SymmetryScore",
    "GroupReport",
    "RefinedLayout",
    "group_objects",
    "center_score",
    "size_score",
    "score",
    "aggregate_t",
    "choose_axis",
    "refine",
    "refine_layout",
]

HORIZONTAL = "horizontal"
VERTICAL = "vertical"


@dataclass(frozen=True)
class SymmetryConfig:
    """Tuning knobs for grouping, scoring, and refinement.

    gap_factor: single-linkage cluster threshold, as a fraction of the
        median object extent along the grouping coordinate.
    sigmoid_shift: the ``c`` in ``sigmoid(t / tau - c)``; larger values snap
        harder near t = 0.
    tau_mode: "median-diagonal" normalizes t by the squared median object
        diagonal of the group; "fixed" uses tau_value directly.
    squared_spacing: score gap deviations squared (default). The unsquared
        variant (deviation from the mean gap, which sums to zero) exists for
        fidelity experiments only.
    literal_center_blend: blend the along-axis coordinate toward the plain
        group mean instead of the equal-spacing sequence. Collapses the
        group toward one point; fidelity experiments only.
    classes: object class ids to refine; None refines every class present.
    """

    gap_factor: float = 0.5
    sigmoid_shift: float = 4.0
    tau_mode: str = "median-diagonal"
    tau_value: float = 1.0
    squared_spacing: bool = True
    literal_center_blend: bool = False
    classes: tuple[int, ...] | None = None


@dataclass(frozen=True)
class SymmetryGroup:
    """A row (axis=horizontal) or column (axis=vertical) of same-class objects.

    Members are sorted by the center coordinate along the axis, ties broken
    by the orthogonal coordinate. ``indices`` are the members' positions in
    the object list the group was built from.
    """

    class_id: int
    axis: str
    members: tuple[FacadeObject, ...]
    indices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class SymmetryScore:
    t_c: float
    t_s: float
    t: float
    t_tilde: float


@dataclass(frozen=True)
class GroupReport:
    class_id: int
    axis: str
    indices: tuple[int, ...]
    before: SymmetryScore
    after: SymmetryScore


@dataclass(frozen=True)
class RefinedLayout:
    objects: list[FacadeObject]
    reports: list[GroupReport]
    chosen_axis: dict[int, str]


def _axes(axis: str) -> tuple[int, int]:
    """(along, ortho) coordinate indices for an axis name."""
    if axis == HORIZONTAL:
        return 0, 1
    if axis == VERTICAL:
        return 1, 0
    raise ValueError(f"axis must be {HORIZONTAL!r} or {VERTICAL!r}, got {axis!r}")


def group_objects(
    objects: Sequence[FacadeObject], axis: str, gap_factor: float = 0.5
) -> list[SymmetryGroup]:
    """Cluster same-class objects into rows/columns by single linkage.

    Two objects of one class land in the same group when their center
    distance along the orthogonal coordinate is at most ``gap_factor``
    times the class's median object extent along that coordinate. Groups
    are maximal; ordering is by class id, then group position.
    """
    along, ortho = _axes(axis)
    groups: list[SymmetryGroup] = []
    for class_id in sorted({o.class_id for o in objects}):
        idx = [i for i, o in enumerate(objects) if o.class_id == class_id]
        ortho_pos = [objects[i].center[ortho] for i in idx]
        threshold = gap_factor * statistics.median(
            objects[i].size[ortho] for i in idx
        )
        order = sorted(range(len(idx)), key=lambda k: ortho_pos[k])
        clusters: list[list[int]] = [[idx[order[0]]]]
        for prev, cur in zip(order, order[1:]):
            if ortho_pos[cur] - ortho_pos[prev] <= threshold:
                clusters[-1].append(idx[cur])
            else:
                clusters.append([idx[cur]])
        for members in clusters:
            members.sort(
                key=lambda i: (objects[i].center[along], objects[i].center[ortho])
            )
            groups.append(
                SymmetryGroup(
                    class_id=class_id,
                    axis=axis,
                    members=tuple(objects[i] for i in members),
                    indices=tuple(members),
                )
            )
    return groups


def _var(values: np.ndarray) -> float:
    """Biased variance: mean squared deviation from the mean."""
    return float(np.mean((values - values.mean()) ** 2)) if len(values) else 0.0


def center_score(group: SymmetryGroup, *, squared_spacing: bool = True) -> float:
    """Center regularity: orthogonal spread plus gap unevenness.

    The first term is the variance of the centers' orthogonal coordinate
    (how far off the shared line they sit). The second is the variance of
    consecutive center gaps along the group axis (how uneven the spacing
    is); singletons contribute no spacing term. With
    ``squared_spacing=False`` the second term is the mean of the raw,
    unsquared gap deviations, which is identically zero.
    """
    along, ortho = _axes(group.axis)
    ortho_pos = np.array([m.center[ortho] for m in group.members], dtype=np.float64)
    t_c = _var(ortho_pos)
    if len(group) >= 2:
        gaps = np.diff(
            np.array([m.center[along] for m in group.members], dtype=np.float64)
        )
        if squared_spacing:
            t_c += _var(gaps)
        else:
            t_c += float(np.mean(gaps - gaps.mean()))
    return t_c


def size_score(group: SymmetryGroup) -> float:
    """Size regularity: variance of widths plus variance of heights."""
    sizes = np.array([m.size for m in group.members], dtype=np.float64)
    return _var(sizes[:, 0]) + _var(sizes[:, 1])


def _tau(group: SymmetryGroup, config: SymmetryConfig) -> float:
    if config.tau_mode == "fixed":
        return float(config.tau_value)
    if config.tau_mode != "median-diagonal":
        raise ValueError(f"unknown tau_mode {config.tau_mode!r}")
    diag = statistics.median(
        float(np.hypot(m.size[0], m.size[1])) for m in group.members
    )
    return diag * diag


def score(group: SymmetryGroup, config: SymmetryConfig | None = None) -> SymmetryScore:
    """Full score of one group: t_c, t_s, their sum, and the sigmoid squash."""
    cfg = config or SymmetryConfig()
    t_c = center_score(group, squared_spacing=cfg.squared_spacing)
    t_s = size_score(group)
    t = t_c + t_s
    t_tilde = float(expit(t / _tau(group, cfg) - cfg.sigmoid_shift))
    return SymmetryScore(t_c=t_c, t_s=t_s, t=t, t_tilde=t_tilde)


def aggregate_t(
    groups: Sequence[SymmetryGroup], scores: Sequence[SymmetryScore]
) -> float:
    """Member-weighted mean of group t values (the per-axis total)."""
    total = sum(len(g) for g in groups)
    if total == 0:
        return 0.0
    return sum(len(g) * s.t for g, s in zip(groups, scores)) / total


def choose_axis(t_horizontal: float, t_vertical: float) -> str:
    """Pick the direction with the lower aggregate t; ties go vertical."""
    return HORIZONTAL if t_horizontal < t_vertical else VERTICAL


def refine(
    group: SymmetryGroup,
    group_score: SymmetryScore,
    bounds: tuple[int, int] | None = None,
    config: SymmetryConfig | None = None,
) -> tuple[FacadeObject, ...]:
    """Blend a group toward its regular-grid target with weight 1 - t_tilde.

    Sizes and the orthogonal center coordinate move toward the group means;
    the along-axis coordinate moves toward the equal-spacing sequence whose
    gap is the group's mean gap and whose mean equals the group's mean
    center (so group means are preserved exactly). When ``bounds`` (width,
    height) is given, refined boxes are clamped into the image.
    """
    cfg = config or SymmetryConfig()
    t_tilde = group_score.t_tilde
    along, ortho = _axes(group.axis)
    n = len(group)
    pos = np.array([m.center[along] for m in group.members], dtype=np.float64)
    off = np.array([m.center[ortho] for m in group.members], dtype=np.float64)
    sizes = np.array([m.size for m in group.members], dtype=np.float64)

    if cfg.literal_center_blend or n == 1:
        target = np.full(n, pos.mean())
    else:
        mean_gap = (pos[-1] - pos[0]) / (n - 1)
        target = pos.mean() + (np.arange(n) - (n - 1) / 2.0) * mean_gap
    pos_new = t_tilde * pos + (1.0 - t_tilde) * target
    off_new = t_tilde * off + (1.0 - t_tilde) * off.mean()
    sizes_new = t_tilde * sizes + (1.0 - t_tilde) * sizes.mean(axis=0)

    if bounds is not None:
        w_img, h_img = float(bounds[0]), float(bounds[1])
        lim = (w_img, h_img) if group.axis == HORIZONTAL else (h_img, w_img)
        sizes_new[:, 0] = np.minimum(sizes_new[:, 0], w_img)
        sizes_new[:, 1] = np.minimum(sizes_new[:, 1], h_img)
        half_along = sizes_new[:, 0 if group.axis == HORIZONTAL else 1] / 2.0
        half_ortho = sizes_new[:, 1 if group.axis == HORIZONTAL else 0] / 2.0
        pos_new = np.clip(pos_new, half_along, lim[0] - half_along)
        off_new = np.clip(off_new, half_ortho, lim[1] - half_ortho)

    out = []
    for k, member in enumerate(group.members):
        center = [0.0, 0.0]
        center[along] = float(pos_new[k])
        center[ortho] = float(off_new[k])
        out.append(
            member.moved((center[0], center[1]), (float(sizes_new[k, 0]), float(sizes_new[k, 1])))
        )
    return tuple(out)


def refine_layout(
    objects: Sequence[FacadeObject],
    config: SymmetryConfig | None = None,
    bounds: tuple[int, int] | None = None,
) -> RefinedLayout:
    """Refine every enabled class of a facade along its better direction.

    Per class: group along both directions, score both, keep the direction
    whose member-weighted aggregate t is lower (ties vertical), and blend
    each group of that direction. Returns the refined objects (same count,
    same order, same classes) plus per-group before/after scores.
    """
    cfg = config or SymmetryConfig()
    objects = list(objects)
    refined: list[FacadeObject] = list(objects)
    reports: list[GroupReport] = []
    chosen: dict[int, str] = {}
    if not objects:
        return RefinedLayout(refined, reports, chosen)

    groups_h = group_objects(objects, HORIZONTAL, cfg.gap_factor)
    groups_v = group_objects(objects, VERTICAL, cfg.gap_factor)
    present = sorted({o.class_id for o in objects})
    enabled = set(present) if cfg.classes is None else set(cfg.classes)
    for class_id in present:
        if class_id not in enabled:
            continue
        axis_groups = {
            HORIZONTAL: [g for g in groups_h if g.class_id == class_id],
            VERTICAL: [g for g in groups_v if g.class_id == class_id],
        }
        axis_scores = {
            axis: [score(g, cfg) for g in groups]
            for axis, groups in axis_groups.items()
        }
        axis = choose_axis(
            aggregate_t(axis_groups[HORIZONTAL], axis_scores[HORIZONTAL]),
            aggregate_t(axis_groups[VERTICAL], axis_scores[VERTICAL]),
        )
        chosen[class_id] = axis
        for group, before in zip(axis_groups[axis], axis_scores[axis]):
            members = refine(group, before, bounds=bounds, config=cfg)
            for i, member in zip(group.indices, members):
                refined[i] = member
            after = score(
                SymmetryGroup(class_id, axis, members, group.indices), cfg
            )
            reports.append(
                GroupReport(
                    class_id=class_id,
                    axis=axis,
                    indices=group.indices,
                    before=before,
                    after=after,
                )
            )
    return RefinedLayout(refined, reports, chosen)
