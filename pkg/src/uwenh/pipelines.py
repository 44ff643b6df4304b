"""Named pipeline presets and the declarative pipeline executor.

Presets cover the ten operator-order PDE variants (pde-A-B, where A is
applied first inside the forcing cascade) plus the two colour-cast-removal
pipelines pa-1 and pa-2 built around the XYZ-space stretch core.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .analysis import QualityReport, cast_score, channel_histogram, luminance, quality_report
from .colour import HomomorphicParams, fuzzy_homomorphic, xyz_cast_removal
from .contrast import (
    OperatorSpec,
    apply_operator,
    operator_spec_from_dict,
    operator_spec_to_dict,
    pwl_apply,
    pwl_from_stats,
)
from .errors import NotColourImageError, UnknownPipelineError
from .image import ImageBuffer
from .pde import EvolutionTrace, PdeConfig, evolve

STAGE_KINDS = ("pde-evolve", "operator", "xyz-cast-removal", "fuzzy-homomorphic", "pwl-finisher")

# dark/faded trigger for the conditional restore stages
DARK_MEAN_THRESHOLD = 0.35
FADED_RANGE_THRESHOLD = 0.5

CAST_HINT_THRESHOLD = 0.15


@dataclass(frozen=True)
class Stage:
    kind: str
    pde: Optional[PdeConfig] = None  # pde-evolve
    operator: Optional[OperatorSpec] = None  # operator
    homomorphic: Optional[HomomorphicParams] = None  # fuzzy-homomorphic
    only_if_dark: bool = False  # skip unless the image is dark or faded

    def __post_init__(self):
        if self.kind not in STAGE_KINDS:
            raise ValueError(f"unknown stage kind {self.kind!r}")

    def label(self) -> str:
        if self.kind == "operator":
            return f"operator:{self.operator.name}"
        return self.kind


@dataclass(frozen=True)
class PipelineSpec:
    name: str
    stages: Tuple[Stage, ...]

    def __post_init__(self):
        if not self.stages:
            raise ValueError("stage sequence must be non-empty")


@dataclass(frozen=True)
class StageRecord:
    label: str
    skipped: bool
    report: Optional[QualityReport]


@dataclass
class RunReport:
    pipeline: str
    input_report: QualityReport
    stages: List[StageRecord] = field(default_factory=list)
    trace: Optional[EvolutionTrace] = None  # trace of the last PDE stage

    def csv_rows(self) -> List[list]:
        rows = [["input"] + self.input_report.csv_row("")[1:]]
        for rec in self.stages:
            if rec.skipped:
                rows.append([rec.label, "skipped", "", "", "", ""])
            else:
                rows.append([rec.label] + rec.report.csv_row("")[1:])
        return rows


def is_dark_or_faded(buf: ImageBuffer) -> bool:
    lum = luminance(buf)
    return bool(lum.mean() < DARK_MEAN_THRESHOLD or (lum.max() - lum.min()) < FADED_RANGE_THRESHOLD)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

_OP_NAMES = ("clahe", "pwl", "hs", "cs", "goc2", "goc3")

PRESET_NAMES = (
    "pde-clahe-hs",
    "pde-clahe-goc2",
    "pde-clahe-goc3",
    "pde-clahe-pwl",
    "pde-clahe-cs",
    "pde-hs-clahe",
    "pde-goc2-clahe",
    "pde-goc3-clahe",
    "pde-pwl-clahe",
    "pde-cs-clahe",
    "pa-1",
    "pa-2",
)


def _forcing_cascade(first: str, second: str) -> OperatorSpec:
    return OperatorSpec("cascade", {"stages": [OperatorSpec(first, {}), OperatorSpec(second, {})]})


def _preset_pde_config(first: str, second: str) -> PdeConfig:
    return PdeConfig(
        model="split",
        lambda_diff=0.5,
        lambda_local=0.8,
        lambda_global=0.0,
        lambda_colour=0.05,
        dt=0.1,
        max_iters=20,
        local_op=_forcing_cascade(first, second),
    )


def _pa_pde_config() -> PdeConfig:
    # the PWL-CLAHE scheme: PWL applied first, CLAHE second. The PWL stage
    # stretches the full min/max range rather than clipping at percentiles:
    # percentile clipping saturates a cast channel into a spike at 1.0 that
    # equalization cannot undo, leaving the cast in place. The longer,
    # stronger fidelity pull lets the equalization (which also realigns the
    # channel means) reach steady state
    cascade_op = OperatorSpec(
        "cascade",
        {
            "stages": [
                OperatorSpec("pwl", {"p_low_frac": 0.0, "p_high_frac": 1.0}),
                OperatorSpec("clahe", {}),
            ]
        },
    )
    return dataclasses.replace(
        _preset_pde_config("pwl", "clahe"),
        lambda_local=1.0,
        max_iters=40,
        local_op=cascade_op,
    )


def resolve_named(name: str) -> PipelineSpec:
    """Look up a preset by name; resolving twice yields identical specs."""
    if name.startswith("pde-") and name in PRESET_NAMES:
        parts = name.split("-")
        first, second = parts[1], parts[2]
        return PipelineSpec(name, (Stage("pde-evolve", pde=_preset_pde_config(first, second)),))
    if name == "pa-1":
        return PipelineSpec(
            "pa-1",
            (
                Stage("xyz-cast-removal"),
                Stage("pde-evolve", pde=_pa_pde_config()),
                Stage("fuzzy-homomorphic", homomorphic=HomomorphicParams()),
                Stage("pwl-finisher", only_if_dark=True),
            ),
        )
    if name == "pa-2":
        return PipelineSpec(
            "pa-2",
            (
                Stage("pde-evolve", pde=_pa_pde_config()),
                Stage("xyz-cast-removal"),
                Stage("pwl-finisher", only_if_dark=True),
            ),
        )
    raise UnknownPipelineError(f"no preset named {name!r} (known: {', '.join(PRESET_NAMES)})")


# ---------------------------------------------------------------------------
# executor
# ---------------------------------------------------------------------------


def _run_stage(buf: ImageBuffer, stage: Stage):
    if stage.kind == "pde-evolve":
        out, trace = evolve(buf, stage.pde)
        return out, trace
    if stage.kind == "operator":
        return apply_operator(buf, stage.operator), None
    if stage.kind == "xyz-cast-removal":
        return xyz_cast_removal(buf), None
    if stage.kind == "fuzzy-homomorphic":
        return fuzzy_homomorphic(buf, stage.homomorphic or HomomorphicParams()), None
    if stage.kind == "pwl-finisher":
        return pwl_apply(buf, pwl_from_stats(buf)), None
    raise ValueError(f"unknown stage kind {stage.kind!r}")


def run_pipeline(buf: ImageBuffer, spec: PipelineSpec) -> Tuple[ImageBuffer, RunReport]:
    """Apply the stages in order, recording per-stage quality snapshots."""
    report = RunReport(pipeline=spec.name, input_report=quality_report(buf))
    current = buf
    for stage in spec.stages:
        if stage.only_if_dark and not is_dark_or_faded(current):
            report.stages.append(StageRecord(stage.label(), skipped=True, report=None))
            continue
        current, trace = _run_stage(current, stage)
        if trace is not None:
            report.trace = trace
        report.stages.append(StageRecord(stage.label(), skipped=False, report=quality_report(current)))
    return current, report


def run_pa1(buf: ImageBuffer) -> Tuple[ImageBuffer, RunReport]:
    """Cast removal first, then PDE enhancement and contrast restoration."""
    if buf.channels != 3:
        raise NotColourImageError("pa-1 requires 3 channels")
    return run_pipeline(buf, resolve_named("pa-1"))


def run_pa2(buf: ImageBuffer, include_fuzzy: bool = False) -> Tuple[ImageBuffer, RunReport]:
    """PDE enhancement first, then cast removal; optional dark-restore stages.

    The fuzzy homomorphic stage is opt-in (conditional on the dark/faded
    trigger) to keep the default pipeline shorter than pa-1.
    """
    if buf.channels != 3:
        raise NotColourImageError("pa-2 requires 3 channels")
    spec = resolve_named("pa-2")
    if include_fuzzy:
        stages = list(spec.stages)
        stages.insert(2, Stage("fuzzy-homomorphic", homomorphic=HomomorphicParams(), only_if_dark=True))
        spec = PipelineSpec("pa-2", tuple(stages))
    return run_pipeline(buf, spec)


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiagnoseResult:
    cast_score: float
    histograms: tuple  # per-channel Histogram
    hint: str  # "pa" or "fig2"
    suggested: tuple  # preset names


def diagnose(buf: ImageBuffer) -> DiagnoseResult:
    """Non-binding pipeline recommendation from the channel-mean misalignment."""
    if buf.channels != 3:
        raise NotColourImageError("diagnose requires 3 channels")
    score = cast_score(buf)
    hists = tuple(channel_histogram(buf, c) for c in range(3))
    if score > CAST_HINT_THRESHOLD:
        return DiagnoseResult(score, hists, "pa", ("pa-1", "pa-2"))
    return DiagnoseResult(score, hists, "fig2", tuple(n for n in PRESET_NAMES if n.startswith("pde-")))


# ---------------------------------------------------------------------------
# config-file (de)serialization
# ---------------------------------------------------------------------------


def _pde_to_dict(cfg: PdeConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["local_op"] = operator_spec_to_dict(cfg.local_op)
    d["global_op"] = operator_spec_to_dict(cfg.global_op)
    return d


def _pde_from_dict(d: dict) -> PdeConfig:
    kwargs = dict(d)
    if "local_op" in kwargs:
        kwargs["local_op"] = operator_spec_from_dict(kwargs["local_op"])
    if "global_op" in kwargs:
        kwargs["global_op"] = operator_spec_from_dict(kwargs["global_op"])
    return PdeConfig(**kwargs)


def stage_to_dict(stage: Stage) -> dict:
    d: dict = {"kind": stage.kind}
    if stage.only_if_dark:
        d["only_if_dark"] = True
    if stage.pde is not None:
        d["pde"] = _pde_to_dict(stage.pde)
    if stage.operator is not None:
        d["operator"] = operator_spec_to_dict(stage.operator)
    if stage.homomorphic is not None:
        d["homomorphic"] = dataclasses.asdict(stage.homomorphic)
    return d


def stage_from_dict(d: dict) -> Stage:
    return Stage(
        kind=d["kind"],
        pde=_pde_from_dict(d["pde"]) if "pde" in d else None,
        operator=operator_spec_from_dict(d["operator"]) if "operator" in d else None,
        homomorphic=HomomorphicParams(**d["homomorphic"]) if "homomorphic" in d else None,
        only_if_dark=bool(d.get("only_if_dark", False)),
    )


def pipeline_to_json(spec: PipelineSpec) -> str:
    doc = {"name": spec.name, "stages": [stage_to_dict(s) for s in spec.stages]}
    return json.dumps(doc, indent=2) + "\n"


def pipeline_from_json(text: str) -> PipelineSpec:
    doc = json.loads(text)
    return PipelineSpec(doc["name"], tuple(stage_from_dict(s) for s in doc["stages"]))
