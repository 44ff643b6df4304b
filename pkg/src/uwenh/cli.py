"""Batch command-line front end: enhance, analyze, compare, presets.

Examples:
    uwenh --seed-corpus corpus/
    uwenh enhance corpus/*.png --pipeline pde-clahe-goc2 --out results/
    uwenh analyze corpus/cast_blue_30.png --out reports/
    uwenh compare corpus/cast_blue_30.png --pipeline pa-1 --pipeline pa-2 --out cmp/
    uwenh presets --dump pa-1
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import cv2
import numpy as np

from .analysis import QUALITY_CSV_HEADER, quality_report
from .contrast import OperatorSpec
from .corpus import write_corpus
from .errors import UwenhError
from .image import ImageBuffer, load_image, save_image
from .pde import PdeConfig
from .pipelines import (
    PRESET_NAMES,
    PipelineSpec,
    Stage,
    diagnose,
    pipeline_from_json,
    pipeline_to_json,
    resolve_named,
    run_pipeline,
)

REPORT_HEADER = ["stage", "entropy", "rms_contrast", "colourfulness", "mean_gradient", "cast_score"]


# ---------------------------------------------------------------------------
# --set overrides (dotted keys, validated before any image is touched)
# ---------------------------------------------------------------------------


def _coerce(text: str):
    try:
        return json.loads(text)
    except ValueError:
        return text


def _override_operator(spec: OperatorSpec, opname: str, param: str, value) -> tuple:
    hits = 0
    params = dict(spec.params)
    if spec.name == "cascade":
        new_stages = []
        for sub in params["stages"]:
            new_sub, h = _override_operator(sub, opname, param, value)
            new_stages.append(new_sub)
            hits += h
        params["stages"] = new_stages
        return OperatorSpec(spec.name, params), hits
    if spec.name == opname:
        params[param] = value
        hits = 1
    return OperatorSpec(spec.name, params), hits


def _override_stage(stage: Stage, prefix: str, param: str, value) -> tuple:
    hits = 0
    pde = stage.pde
    operator = stage.operator
    homomorphic = stage.homomorphic
    if prefix == "pde" and pde is not None:
        if param not in {f.name for f in dataclasses.fields(PdeConfig)}:
            raise ValueError(f"unknown pde parameter {param!r}")
        pde = dataclasses.replace(pde, **{param: value})
        hits = 1
    elif prefix == "homomorphic" and homomorphic is not None:
        homomorphic = dataclasses.replace(homomorphic, **{param: value})
        hits = 1
    else:
        if operator is not None:
            operator, h = _override_operator(operator, prefix, param, value)
            hits += h
        if pde is not None:
            lop, h1 = _override_operator(pde.local_op, prefix, param, value)
            gop, h2 = _override_operator(pde.global_op, prefix, param, value)
            if h1 or h2:
                pde = dataclasses.replace(pde, local_op=lop, global_op=gop)
            hits += h1 + h2
    return Stage(stage.kind, pde=pde, operator=operator, homomorphic=homomorphic,
                 only_if_dark=stage.only_if_dark), hits


def apply_overrides(spec: PipelineSpec, overrides) -> PipelineSpec:
    """Apply KEY=VALUE overrides with dotted keys (pde.dt, clahe.clip_factor)."""
    for raw in overrides:
        if "=" not in raw:
            raise ValueError(f"override {raw!r} is not KEY=VALUE")
        key, text = raw.split("=", 1)
        if key.count(".") != 1:
            raise ValueError(f"override key {key!r} must be '<target>.<param>'")
        prefix, param = key.split(".")
        value = _coerce(text)
        total = 0
        new_stages = []
        for stage in spec.stages:
            stage, hits = _override_stage(stage, prefix, param, value)
            new_stages.append(stage)
            total += hits
        if total == 0:
            raise ValueError(f"override {key!r} matched no stage of pipeline {spec.name!r}")
        spec = PipelineSpec(spec.name, tuple(new_stages))
    return spec


def _load_pipeline(args) -> PipelineSpec:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            spec = pipeline_from_json(fh.read())
    elif args.pipeline:
        spec = resolve_named(args.pipeline)
    else:
        raise ValueError("one of --pipeline or --config is required")
    return apply_overrides(spec, args.set or [])


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def cmd_enhance(args) -> int:
    if len(set(args.inputs)) != len(args.inputs):
        print("error: duplicate input paths", file=sys.stderr)
        return 2
    try:
        spec = _load_pipeline(args)
    except (UwenhError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    os.makedirs(args.out, exist_ok=True)

    def work(path: str):
        buf = load_image(path)
        out, report = run_pipeline(buf, spec)
        stem = os.path.splitext(os.path.basename(path))[0]
        save_image(out, os.path.join(args.out, f"{stem}.{spec.name}.png"), bit_depth=args.bit_depth)
        _write_csv(os.path.join(args.out, f"{stem}.{spec.name}.report.csv"),
                   REPORT_HEADER, report.csv_rows())
        if report.trace is not None:
            with open(os.path.join(args.out, f"{stem}.{spec.name}.trace.csv"), "w",
                      encoding="utf-8") as fh:
                fh.write(report.trace.to_csv())

    failures = []
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        futures = {path: pool.submit(work, path) for path in args.inputs}
    for path in sorted(futures):
        exc = futures[path].exception()
        if exc is not None:
            failures.append((path, exc))
    for path, exc in failures:
        print(f"FAILED {path}: {exc}", file=sys.stderr)
    print(f"enhanced {len(args.inputs) - len(failures)}/{len(args.inputs)} images -> {args.out}")
    return 1 if failures else 0


def cmd_analyze(args) -> int:
    try:
        buf = load_image(args.input)
        result = diagnose(buf)
    except (UwenhError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    os.makedirs(args.out, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.input))[0]

    bins = result.histograms[0].bins
    rows = [[b] + [int(h.counts[b]) for h in result.histograms] for b in range(bins)]
    _write_csv(os.path.join(args.out, f"{stem}.hist.csv"), ["bin", "r", "g", "b"], rows)

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 3.5))
    centers = (np.arange(bins) + 0.5) / bins
    for h, colour, label in zip(result.histograms, ("r", "g", "b"), ("R", "G", "B")):
        ax.plot(centers, h.counts, color=colour, label=label, linewidth=1.0)
    ax.set_xlabel("intensity")
    ax.set_ylabel("count")
    ax.set_title(f"{stem}: per-channel histograms")
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(args.out, f"{stem}.hist.png"), dpi=120)
    plt.close(fig)

    print(f"cast_score: {result.cast_score:.6f}")
    family = "pa-1/pa-2" if result.hint == "pa" else "pde-* presets"
    print(f"hint: {family} (suggested: {', '.join(result.suggested[:4])})")
    return 0


def _montage(panels, labels) -> np.ndarray:
    """Single-row montage: 8-pixel separators, label strip above each panel."""
    strip = 16
    sep = 8
    h = max(p.shape[0] for p in panels)
    pieces = []
    for i, (panel, label) in enumerate(zip(panels, labels)):
        img = (np.clip(panel, 0.0, 1.0) * 255).astype(np.uint8)
        if img.shape[2] == 1:
            img = np.repeat(img, 3, axis=2)
        pad_h = h - img.shape[0]
        img = np.pad(img, ((strip, pad_h), (0, 0), (0, 0)), constant_values=255)
        cv2.putText(img, label, (2, 12), cv2.FONT_HERSHEY_SIMPLEX, 0.35, (0, 0, 0), 1, cv2.LINE_AA)
        if i:
            pieces.append(np.full((h + strip, sep, 3), 255, dtype=np.uint8))
        pieces.append(img)
    return np.concatenate(pieces, axis=1)


def cmd_compare(args) -> int:
    if not args.inputs or not args.pipeline:
        print("error: need at least one input and one --pipeline", file=sys.stderr)
        return 2
    try:
        specs = [apply_overrides(resolve_named(n), args.set or []) for n in args.pipeline]
    except (UwenhError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    os.makedirs(args.out, exist_ok=True)

    def work(path: str):
        rows = []
        buf = load_image(path)
        image_id = os.path.splitext(os.path.basename(path))[0]
        rows.append([image_id, "original"] + quality_report(buf).csv_row("")[1:] + [""])
        panels = [buf.data]
        labels = ["original"]
        ok = True
        for spec in specs:
            try:
                out, _ = run_pipeline(buf, spec)
                rows.append([image_id, spec.name] + quality_report(out).csv_row("")[1:] + [""])
                panels.append(out.data)
                labels.append(spec.name)
            except UwenhError as exc:
                rows.append([image_id, spec.name, "", "", "", "", "", str(exc)])
                ok = False
        montage = _montage(panels, labels)
        cv2.imwrite(os.path.join(args.out, f"{image_id}.montage.png"), montage[:, :, ::-1])
        return rows, ok

    all_rows = []
    failures = []
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        futures = {path: pool.submit(work, path) for path in args.inputs}
    for path in sorted(futures):
        exc = futures[path].exception()
        if exc is not None:
            failures.append((path, exc))
            image_id = os.path.splitext(os.path.basename(path))[0]
            all_rows.append([image_id, "original", "", "", "", "", "", str(exc)])
            continue
        rows, ok = futures[path].result()
        all_rows.extend(rows)
        if not ok:
            failures.append((path, "pipeline failure"))
    _write_csv(os.path.join(args.out, "compare.csv"),
               ["image_id", "pipeline"] + list(QUALITY_CSV_HEADER[1:]) + ["reason"], all_rows)
    print(f"compared {len(args.inputs)} image(s) x {len(specs)} pipeline(s) -> {args.out}")
    return 1 if failures else 0


def cmd_presets(args) -> int:
    if args.dump:
        try:
            print(pipeline_to_json(resolve_named(args.dump)), end="")
        except UwenhError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        return 0
    for name in PRESET_NAMES:
        print(name)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uwenh", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--seed-corpus", metavar="DIR",
                        help="emit the bundled 24-image synthetic corpus to DIR and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("enhance", help="run one pipeline over a batch of images")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--pipeline", help="preset pipeline name")
    p.add_argument("--config", help="pipeline config JSON path")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="parameter override with dotted key, e.g. pde.dt=0.05")
    p.add_argument("--out", required=True)
    p.add_argument("--bit-depth", type=int, choices=(8, 16), default=8)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("analyze", help="per-channel histograms and cast diagnosis")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare", help="quality-metric matrix and montages")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--pipeline", action="append", help="preset name (repeatable)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("presets", help="list or dump named pipelines")
    p.add_argument("--dump", metavar="NAME", help="print the preset as config JSON")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed_corpus:
        paths = write_corpus(args.seed_corpus)
        print(f"wrote {len(paths)} corpus images to {args.seed_corpus}")
        return 0
    if not args.command:
        build_parser().print_help()
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
