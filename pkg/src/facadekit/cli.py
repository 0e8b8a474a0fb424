"""Command-line pipeline: extract, refine, rasterize, evaluate, grammar,
mesh, synth, losses-check, and the chained reconstruct.

Every subcommand takes ``--config`` (TOML, flags win) and ``--report``
(summary JSON: command, config echo, inputs, outputs, metrics, warnings,
duration). Errors derived from FacadeError exit 2 with a categorized
message; I/O errors exit 3.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import PipelineConfig, load_config
from .exceptions import ConfigError, FacadeError, ParseFailure
from .grammar import emit_grammar, load_grammar, save_grammar
from .instances import FacadeObject, extract_instances, find_overlaps
from .labelmap import (
    ClassPalette,
    default_palette,
    load_image,
    load_labelmap,
    load_palette,
    save_labelmap,
    save_palette,
    synth_palette,
)
from .losses import (
    LOG_CLAMP,
    corner_loss,
    cross_entropy,
    encode_targets,
    focal_loss,
    grad_check,
    offset_loss,
    one_hot,
    size_loss,
)
from .mesh import build_mesh, export_obj, load_templates
from .metrics import ConfusionCounts, confusion, report_from_counts
from .raster import clear_objects, rasterize
from .symmetry import SymmetryScore, refine_layout
from .synth import SynthSpec, generate

__all__ = ["main", "run", "build_parser"]


# ---------------------------------------------------------------- helpers


def _resolve_palette(name: str | None) -> ClassPalette:
    """A palette argument is 'default', 'synth', or a JSON file path."""
    if name is None or name == "default":
        return default_palette()
    if name == "synth":
        return synth_palette()
    return load_palette(name)


def _write_json(path: str | Path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _read_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseFailure(f"{path}: invalid JSON ({exc})") from exc


def objects_to_json(objects, palette: ClassPalette, overlaps=None) -> list[dict]:
    records = []
    for i, obj in enumerate(objects):
        record = {
            "class": palette.name_of(obj.class_id),
            "center": [float(obj.center[0]), float(obj.center[1])],
            "size": [float(obj.size[0]), float(obj.size[1])],
            "corners": [[float(x), float(y)] for x, y in obj.corners],
            "pixels": int(obj.pixel_count),
        }
        if overlaps and i in overlaps:
            record["overlaps"] = True
        records.append(record)
    return records


def objects_from_json(data, palette: ClassPalette) -> list[FacadeObject]:
    if not isinstance(data, list):
        raise ParseFailure("instances file must hold a JSON list")
    objects = []
    for i, record in enumerate(data):
        try:
            corners = record["corners"]
            if len(corners) != 4:
                raise ValueError("need exactly 4 corners")
            objects.append(
                FacadeObject(
                    class_id=palette.id_of(record["class"]),
                    center=(float(record["center"][0]), float(record["center"][1])),
                    size=(float(record["size"][0]), float(record["size"][1])),
                    corners=tuple((float(x), float(y)) for x, y in corners),
                    pixel_count=int(record["pixels"]),
                )
            )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ParseFailure(f"instance {i}: malformed record ({exc})") from exc
    return objects


def _score_dict(score: SymmetryScore) -> dict:
    return {
        "t_c": float(score.t_c),
        "t_s": float(score.t_s),
        "t": float(score.t),
        "t_tilde": float(score.t_tilde),
    }


def _symmetry_report(layout, palette: ClassPalette) -> dict:
    return {
        "chosen_axis": {
            palette.name_of(c): axis for c, axis in sorted(layout.chosen_axis.items())
        },
        "groups": [
            {
                "class": palette.name_of(r.class_id),
                "axis": r.axis,
                "indices": list(r.indices),
                "before": _score_dict(r.before),
                "after": _score_dict(r.after),
            }
            for r in layout.reports
        ],
    }


def _parse_pair(text: str, what: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError as exc:
        raise ConfigError(f"{what} must look like WxH, got {text!r}") from exc


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.4f}"


def _print_eval_table(report) -> None:
    print(f"{'class':<12} {'accuracy':>9} {'iou':>9}")
    d = report.to_dict()
    for name in report.class_names:
        print(
            f"{name:<12} {_fmt(d['per_class_accuracy'][name]):>9} "
            f"{_fmt(d['per_class_iou'][name]):>9}"
        )
    print(f"{'total_acc':<12} {report.total_accuracy:>9.4f}")
    print(f"{'miou':<12} {report.miou:>9.4f}")


def _print_ablation_table(before, after, deltas: dict) -> None:
    print(f"{'class':<12} {'iou_before':>11} {'iou_after':>11} {'delta':>9}")
    b, a = before.to_dict(), after.to_dict()
    for name in before.class_names:
        print(
            f"{name:<12} {_fmt(b['per_class_iou'][name]):>11} "
            f"{_fmt(a['per_class_iou'][name]):>11} {_fmt(deltas['iou_' + name]):>9}"
        )
    print(
        f"{'miou':<12} {before.miou:>11.4f} {after.miou:>11.4f} "
        f"{deltas['miou']:>9.4f}"
    )
    print(
        f"{'total_acc':<12} {before.total_accuracy:>11.4f} "
        f"{after.total_accuracy:>11.4f} {deltas['total_accuracy']:>9.4f}"
    )


# ------------------------------------------------------------ subcommands


def _cmd_extract(args, config: PipelineConfig) -> dict:
    palette = _resolve_palette(config.palette)
    labelmap = load_labelmap(args.input, palette)
    objects = extract_instances(
        labelmap, palette, min_area=config.min_area, connectivity=args.connectivity
    )
    overlaps = find_overlaps(objects) if args.overlaps else None
    _write_json(args.out, objects_to_json(objects, palette, overlaps))
    per_class: dict[str, int] = {}
    for obj in objects:
        name = palette.name_of(obj.class_id)
        per_class[name] = per_class.get(name, 0) + 1
    return {
        "inputs": {"labelmap": str(args.input)},
        "outputs": {"instances": str(args.out)},
        "metrics": {"num_objects": len(objects), "per_class": per_class},
        "warnings": [],
    }


def _cmd_refine(args, config: PipelineConfig) -> dict:
    palette = _resolve_palette(config.palette)
    objects = objects_from_json(_read_json(args.input), palette)
    bounds = _parse_pair(args.image_size, "--image-size") if args.image_size else None
    layout = refine_layout(objects, config.symmetry_config(palette), bounds=bounds)
    _write_json(args.out, objects_to_json(layout.objects, palette))
    outputs = {"instances": str(args.out)}
    if args.symmetry_report:
        _write_json(args.symmetry_report, _symmetry_report(layout, palette))
        outputs["symmetry_report"] = str(args.symmetry_report)
    t_before = [r.before.t for r in layout.reports]
    t_after = [r.after.t for r in layout.reports]
    return {
        "inputs": {"instances": str(args.input)},
        "outputs": outputs,
        "metrics": {
            "num_groups": len(layout.reports),
            "chosen_axis": {
                palette.name_of(c): a for c, a in sorted(layout.chosen_axis.items())
            },
            "mean_t_before": float(np.mean(t_before)) if t_before else None,
            "mean_t_after": float(np.mean(t_after)) if t_after else None,
        },
        "warnings": [],
    }


def _cmd_rasterize(args, config: PipelineConfig) -> dict:
    palette = _resolve_palette(config.palette)
    objects = objects_from_json(_read_json(args.input), palette)
    labelmap = load_labelmap(args.background, palette)
    background = clear_objects(labelmap, palette)
    warnings: list = []
    out = rasterize(
        background,
        objects,
        config.draw_order_ids(palette),
        palette=palette,
        warnings=warnings,
    )
    for record in warnings:
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
    save_labelmap(out, palette, args.out)
    return {
        "inputs": {"instances": str(args.input), "background": str(args.background)},
        "outputs": {"labelmap": str(args.out)},
        "metrics": {"num_objects": len(objects), "num_skipped": len(warnings)},
        "warnings": warnings,
    }


def _image_pairs(pred: str, truth: str, raw: str | None) -> list[tuple[Path, ...]]:
    p, t = Path(pred), Path(truth)
    r = Path(raw) if raw else None
    if p.is_dir() != t.is_dir() or (r is not None and r.is_dir() != p.is_dir()):
        raise ConfigError("evaluate inputs must be all files or all directories")
    if not p.is_dir():
        return [(p, t) + ((r,) if r else ())]
    names = sorted(f.name for f in p.glob("*.png"))
    if not names:
        raise ConfigError(f"no .png files under {p}")
    pairs = []
    for name in names:
        row = [p / name, t / name]
        if not (t / name).exists():
            raise ConfigError(f"truth for {name} missing under {t}")
        if r is not None:
            if not (r / name).exists():
                raise ConfigError(f"ablation input for {name} missing under {r}")
            row.append(r / name)
        pairs.append(tuple(row))
    return pairs


def _cmd_evaluate(args, config: PipelineConfig) -> dict:
    palette = _resolve_palette(config.palette)
    pairs = _image_pairs(args.pred, args.truth, args.ablation)

    def one(row) -> tuple[ConfusionCounts, ConfusionCounts | None]:
        pred = load_labelmap(row[0], palette)
        truth = load_labelmap(row[1], palette)
        counts = confusion(pred, truth, palette)
        raw_counts = None
        if len(row) == 3:
            raw = load_labelmap(row[2], palette)
            raw_counts = confusion(raw, truth, palette)
        return counts, raw_counts

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(one, pairs))
    else:
        results = [one(row) for row in pairs]

    total = results[0][0]
    for counts, _ in results[1:]:
        total = total + counts
    after = report_from_counts(total, palette)

    if args.ablation:
        raw_total = results[0][1]
        for _, raw_counts in results[1:]:
            raw_total = raw_total + raw_counts
        before = report_from_counts(raw_total, palette)
        deltas: dict[str, float | None] = {}
        for c in sorted(before.per_class_iou):
            b, a = before.per_class_iou[c], after.per_class_iou[c]
            deltas[f"iou_{before.class_names[c]}"] = (
                None if b is None or a is None else a - b
            )
        deltas["miou"] = after.miou - before.miou
        deltas["total_accuracy"] = after.total_accuracy - before.total_accuracy
        _print_ablation_table(before, after, deltas)
        metrics = {
            "before": before.to_dict(),
            "after": after.to_dict(),
            "deltas": deltas,
            "num_images": len(pairs),
        }
    else:
        _print_eval_table(after)
        metrics = {**after.to_dict(), "num_images": len(pairs)}

    outputs = {}
    if args.out:
        _write_json(args.out, metrics)
        outputs["metrics"] = str(args.out)
    inputs = {"pred": str(args.pred), "truth": str(args.truth)}
    if args.ablation:
        inputs["ablation"] = str(args.ablation)
    return {"inputs": inputs, "outputs": outputs, "metrics": metrics, "warnings": []}


def _cmd_grammar(args, config: PipelineConfig) -> dict:
    palette = _resolve_palette(config.palette)
    labelmap = load_labelmap(args.input, palette)
    image = load_image(args.image) if args.image else None
    objects = extract_instances(labelmap, palette, min_area=config.min_area)
    doc = emit_grammar(
        objects,
        labelmap,
        palette,
        image,
        pixel_scale=config.pixel_scale,
        gap_factor=config.grammar_gap_factor,
    )
    save_grammar(doc, args.out)
    return {
        "inputs": {"labelmap": str(args.input), "image": args.image and str(args.image)},
        "outputs": {"grammar": str(args.out)},
        "metrics": {
            "num_floors": len(doc.floors),
            "num_elements": sum(len(f.elements) for f in doc.floors),
            "bands": {k: v is not None for k, v in doc.bands.items()},
        },
        "warnings": [],
    }


def _cmd_mesh(args, config: PipelineConfig) -> dict:
    doc = load_grammar(args.input)
    if args.pixel_scale is not None:
        doc = dataclasses.replace(doc, pixel_scale=args.pixel_scale)
    templates = load_templates(args.templates) if args.templates else None
    mesh = build_mesh(doc, templates, config.mesh_config())
    obj_path, mtl_path = export_obj(mesh, doc.materials, args.out)
    return {
        "inputs": {"grammar": str(args.input), "templates": args.templates},
        "outputs": {"obj": str(obj_path), "mtl": str(mtl_path)},
        "metrics": {
            "num_vertices": int(len(mesh.vertices)),
            "num_triangles": int(len(mesh.triangles)),
            "num_groups": len(mesh.groups),
        },
        "warnings": [],
    }


def _cmd_synth(args, config: PipelineConfig) -> dict:
    kwargs: dict = {}
    if args.spec:
        doc = _read_json(args.spec)
        if not isinstance(doc, dict):
            raise ConfigError(f"synth spec {args.spec} must be a JSON object")
        valid = {f.name for f in dataclasses.fields(SynthSpec)}
        bad = sorted(set(doc) - valid)
        if bad:
            raise ConfigError(f"synth spec {args.spec}: unknown keys {bad}")
        kwargs.update(doc)
    if args.size:
        kwargs["width"], kwargs["height"] = _parse_pair(args.size, "--size")
    if args.window:
        kwargs["window_w"], kwargs["window_h"] = _parse_pair(args.window, "--window")
    if args.spacing:
        kwargs["spacing_x"], kwargs["spacing_y"] = _parse_pair(args.spacing, "--spacing")
    for flag in ("rows", "cols", "margin_top", "jitter", "occlusion"):
        value = getattr(args, flag)
        if value is not None:
            kwargs[flag] = value
    if args.no_door:
        kwargs["door"] = False
    if args.balcony:
        kwargs["balcony"] = True
    if args.seed is not None:
        kwargs["seed"] = args.seed

    try:
        spec = SynthSpec(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad synth spec: {exc}") from exc
    truth, jittered, occluded = generate(spec)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    palette = synth_palette()
    save_labelmap(truth, palette, outdir / "truth.png")
    save_labelmap(jittered, palette, outdir / "jittered.png")
    save_labelmap(occluded, palette, outdir / "occluded.png")
    save_palette(palette, outdir / "palette.json")
    _write_json(outdir / "spec.json", dataclasses.asdict(spec))
    return {
        "inputs": {"spec": args.spec},
        "outputs": {
            "truth": str(outdir / "truth.png"),
            "jittered": str(outdir / "jittered.png"),
            "occluded": str(outdir / "occluded.png"),
            "palette": str(outdir / "palette.json"),
            "spec": str(outdir / "spec.json"),
        },
        "metrics": {"width": spec.width, "height": spec.height},
        "warnings": [],
    }


def _losses_check_rows(config: PipelineConfig, seed: int, epsilon: float) -> list[dict]:
    rng = np.random.default_rng(seed)
    rows: list[dict] = []

    def add(name: str, value: float, threshold: float) -> None:
        rows.append(
            {
                "check": name,
                "value": float(value),
                "threshold": threshold,
                "ok": bool(value < threshold),
            }
        )

    # closed forms on a random semantic problem
    n_pix, n_cls = 48, 6
    labels = rng.integers(0, n_cls, size=n_pix)
    truth_sem = one_hot(labels, n_cls)
    uniform = np.full((n_pix, n_cls), 1.0 / n_cls)
    add(
        "uniform_cross_entropy",
        abs(cross_entropy(uniform, truth_sem) - n_pix * np.log(n_cls)),
        1e-10,
    )
    add("perfect_cross_entropy", abs(cross_entropy(truth_sem, truth_sem)), 1e-10)

    pred_sem = rng.uniform(0.05, 1.0, size=(n_pix, n_cls))
    pred_sem /= pred_sem.sum(axis=1, keepdims=True)
    add(
        "grad_cross_entropy",
        grad_check("cross_entropy", {"pred": pred_sem, "truth": truth_sem}, epsilon, rng=rng),
        1e-4,
    )

    # a small detection problem drawn from the synthesizer
    spec = SynthSpec(
        width=96, height=120, rows=2, cols=3, window_w=12, window_h=16,
        spacing_x=28, spacing_y=44, margin_top=10, seed=seed,
    )
    truth_map, _, _ = generate(spec)
    palette = synth_palette()
    objects = extract_instances(truth_map, palette, min_area=16)
    targets = encode_targets(objects, (spec.width, spec.height), stride=config.stride)

    heat = targets.heatmap
    near_perfect = np.where(heat >= 1.0, 1.0 - LOG_CLAMP, LOG_CLAMP)
    add(
        "perfect_focal",
        abs(focal_loss(near_perfect, heat, config.alpha, config.beta)),
        1e-10,
    )
    pred_heat = np.clip(heat + rng.normal(0.0, 0.05, heat.shape), 0.02, 0.98)
    add(
        "grad_focal",
        grad_check(
            "focal",
            {
                "pred": pred_heat,
                "truth": heat,
                "alpha": config.alpha,
                "beta": config.beta,
            },
            epsilon,
            rng=rng,
        ),
        1e-4,
    )

    add("perfect_size", abs(size_loss(targets.size_targets, targets.size_targets)), 1e-10)
    pred_size = targets.size_targets + rng.normal(0.0, 2.0, targets.size_targets.shape)
    add(
        "grad_size",
        grad_check("size", {"pred": pred_size, "target": targets.size_targets}, epsilon, rng=rng),
        1e-4,
    )

    grid_h, grid_w = heat.shape[1], heat.shape[2]
    perfect_off = np.zeros((grid_h, grid_w, 2))
    perfect_off[targets.object_cells[:, 1], targets.object_cells[:, 0]] = (
        targets.offset_targets
    )
    add("perfect_offset", abs(offset_loss(perfect_off, targets)), 1e-10)
    pred_off = rng.uniform(-0.5, 1.5, size=(grid_h, grid_w, 2))
    add(
        "grad_offset",
        grad_check("offset", {"pred": pred_off, "targets": targets}, epsilon, rng=rng),
        1e-4,
    )

    perfect_cor = np.zeros((grid_h, grid_w, 8))
    for k in range(4):
        cells = targets.corner_cells[:, k]
        perfect_cor[cells[:, 1], cells[:, 0], 2 * k : 2 * k + 2] = (
            targets.corner_targets[:, k]
        )
    add("perfect_corner", abs(corner_loss(perfect_cor, targets)), 1e-10)
    pred_cor = rng.uniform(-1.0, 1.0, size=(grid_h, grid_w, 8))
    add(
        "grad_corner",
        grad_check("corner", {"pred": pred_cor, "targets": targets}, epsilon, rng=rng),
        1e-4,
    )
    return rows


def _cmd_losses_check(args, config: PipelineConfig) -> dict:
    seed = 0 if args.seed is None else args.seed
    rows = _losses_check_rows(config, seed, args.epsilon)
    print(f"{'check':<24} {'value':>12} {'threshold':>10} {'status':>7}")
    for row in rows:
        status = "pass" if row["ok"] else "FAIL"
        print(
            f"{row['check']:<24} {row['value']:>12.3e} "
            f"{row['threshold']:>10.0e} {status:>7}"
        )
    failed = [row["check"] for row in rows if not row["ok"]]
    return {
        "inputs": {"seed": seed},
        "outputs": {},
        "metrics": {"checks": rows, "num_failed": len(failed)},
        "warnings": [f"check failed: {name}" for name in failed],
        "exit_code": 1 if failed else 0,
    }


def _cmd_reconstruct(args, config: PipelineConfig) -> dict:
    palette = _resolve_palette(config.palette)
    labelmap = load_labelmap(args.input, palette)
    image = load_image(args.image) if args.image else None
    height, width = labelmap.shape

    objects = extract_instances(labelmap, palette, min_area=config.min_area)
    layout = refine_layout(
        objects, config.symmetry_config(palette), bounds=(width, height)
    )
    background = clear_objects(labelmap, palette)
    warnings: list = []
    refined_map = rasterize(
        background,
        layout,
        config.draw_order_ids(palette),
        palette=palette,
        warnings=warnings,
    )

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    save_labelmap(refined_map, palette, outdir / "refined.png")
    doc = emit_grammar(
        layout.objects,
        refined_map,
        palette,
        image,
        pixel_scale=config.pixel_scale,
        gap_factor=config.grammar_gap_factor,
    )
    save_grammar(doc, outdir / "grammar.json")
    mesh = build_mesh(doc, None, config.mesh_config())
    obj_path, mtl_path = export_obj(mesh, doc.materials, outdir / "model.obj")

    t_before = [r.before.t for r in layout.reports]
    t_after = [r.after.t for r in layout.reports]
    return {
        "inputs": {"labelmap": str(args.input), "image": args.image and str(args.image)},
        "outputs": {
            "refined": str(outdir / "refined.png"),
            "grammar": str(outdir / "grammar.json"),
            "obj": str(obj_path),
            "mtl": str(mtl_path),
        },
        "metrics": {
            "num_objects": len(objects),
            "num_groups": len(layout.reports),
            "num_floors": len(doc.floors),
            "mean_t_before": float(np.mean(t_before)) if t_before else None,
            "mean_t_after": float(np.mean(t_after)) if t_after else None,
            "symmetry": _symmetry_report(layout, palette),
        },
        "warnings": warnings,
    }


# ----------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="facadekit",
        description="Facade label maps to symmetry-refined layouts, grammars, and meshes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="TOML config file; flags override it")
        p.add_argument("--report", help="write a machine-readable run summary JSON")
        p.add_argument("--seed", type=int, help="seed for randomized work (default 0)")
        p.add_argument(
            "--palette",
            help="palette JSON path, or the builtin names 'default' / 'synth'",
        )

    p = sub.add_parser("extract", help="label map PNG -> instances JSON")
    common(p)
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--min-area", type=int, dest="min_area")
    p.add_argument("--connectivity", type=int, choices=(4, 8), default=4)
    p.add_argument("--overlaps", action="store_true", help="flag cross-class bbox overlaps")
    p.set_defaults(fn=_cmd_extract)

    p = sub.add_parser("refine", help="instances JSON -> symmetry-refined instances JSON")
    common(p)
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--symmetry-report", dest="symmetry_report")
    p.add_argument("--image-size", dest="image_size", help="WxH clamp bounds")
    p.add_argument("--gap-factor", type=float, dest="gap_factor")
    p.add_argument("--sigmoid-shift", type=float, dest="sigmoid_shift")
    p.add_argument(
        "--tau-mode", dest="sigmoid_tau_mode", choices=("median-diagonal", "fixed")
    )
    p.add_argument("--tau", type=float, dest="sigmoid_tau")
    p.add_argument(
        "--unsquared-spacing",
        action="store_true",
        help="score gap deviations unsquared",
    )
    p.add_argument(
        "--literal-center-blend",
        action="store_true",
        help="blend along-axis centers toward the plain group mean",
    )
    p.add_argument("--classes", help="comma-separated class names to refine")
    p.set_defaults(fn=_cmd_refine)

    p = sub.add_parser("rasterize", help="instances JSON + background PNG -> PNG")
    common(p)
    p.add_argument("input")
    p.add_argument("background")
    p.add_argument("--out", required=True)
    p.add_argument("--order", help="comma-separated class draw order")
    p.set_defaults(fn=_cmd_rasterize)

    p = sub.add_parser("evaluate", help="score predictions against truth")
    common(p)
    p.add_argument("pred")
    p.add_argument("truth")
    p.add_argument("--ablation", help="unrefined predictions for a before/after table")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="write the metrics JSON here too")
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("grammar", help="label map PNG -> grammar JSON")
    common(p)
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--image", help="RGB photo for material sampling")
    p.add_argument("--min-area", type=int, dest="min_area")
    p.add_argument("--pixel-scale", type=float, dest="pixel_scale")
    p.add_argument("--gap-factor", type=float, dest="grammar_gap_factor")
    p.set_defaults(fn=_cmd_grammar)

    p = sub.add_parser("mesh", help="grammar JSON -> OBJ + MTL")
    common(p)
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument(
        "--pixel-scale",
        type=float,
        dest="pixel_scale",
        help="override the grammar's meters-per-pixel",
    )
    p.add_argument("--balcony-threshold", type=float, dest="balcony_area_factor")
    p.add_argument("--roof-pitch", type=float, dest="roof_pitch_deg")
    p.add_argument("--templates", help="JSON template library overriding built-ins")
    p.set_defaults(fn=_cmd_mesh)

    p = sub.add_parser("synth", help="generate a synthetic facade fixture set")
    common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--spec", help="SynthSpec JSON; flags override it")
    p.add_argument("--size", help="WxH map size")
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--window", help="WxH window size")
    p.add_argument("--spacing", help="XxY window spacing")
    p.add_argument("--margin-top", type=int, dest="margin_top")
    p.add_argument("--jitter", type=float)
    p.add_argument("--occlusion", type=float)
    p.add_argument("--no-door", action="store_true", dest="no_door")
    p.add_argument("--balcony", action="store_true")
    p.set_defaults(fn=_cmd_synth)

    p = sub.add_parser("losses-check", help="closed-form and gradient checks")
    common(p)
    p.add_argument("--epsilon", type=float, default=1e-5)
    p.set_defaults(fn=_cmd_losses_check)

    p = sub.add_parser("reconstruct", help="label map PNG -> refined PNG + grammar + OBJ")
    common(p)
    p.add_argument("input")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--image", help="RGB photo for material sampling")
    p.add_argument("--min-area", type=int, dest="min_area")
    p.add_argument("--pixel-scale", type=float, dest="pixel_scale")
    p.add_argument("--gap-factor", type=float, dest="gap_factor")
    p.set_defaults(fn=_cmd_reconstruct)

    return parser


_OVERRIDE_FIELDS = (
    "palette",
    "min_area",
    "gap_factor",
    "sigmoid_shift",
    "sigmoid_tau_mode",
    "sigmoid_tau",
    "pixel_scale",
    "grammar_gap_factor",
    "balcony_area_factor",
    "roof_pitch_deg",
)


def _merge_config(args) -> PipelineConfig:
    config = load_config(args.config)
    overrides: dict = {}
    for name in _OVERRIDE_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "unsquared_spacing", False):
        overrides["squared_spacing"] = False
    if getattr(args, "literal_center_blend", False):
        overrides["literal_center_blend"] = True
    if getattr(args, "classes", None):
        overrides["symmetry_classes"] = tuple(
            s.strip() for s in args.classes.split(",") if s.strip()
        )
    if getattr(args, "order", None):
        overrides["draw_order"] = tuple(
            s.strip() for s in args.order.split(",") if s.strip()
        )
    # mesh reads pixel_scale from the grammar doc; the flag overrides both
    if getattr(args, "command", "") == "mesh":
        overrides.pop("pixel_scale", None)
    return config.with_overrides(**overrides)


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        config = _merge_config(args)
        result = args.fn(args, config)
    except FacadeError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 3

    report_path = args.report
    if report_path is None and args.command == "reconstruct":
        report_path = str(Path(args.out) / "report.json")
    if report_path:
        report = {
            "command": args.command,
            "config_echo": config.echo(),
            "inputs": result["inputs"],
            "outputs": result["outputs"],
            "metrics": result["metrics"],
            "warnings": result["warnings"],
            "duration_ms": int((time.perf_counter() - started) * 1000),
        }
        _write_json(report_path, report)
    return result.get("exit_code", 0)


def main() -> None:
    sys.exit(run())
