"""PDE-based underwater image enhancement: curvature diffusion with
contrast forcing, colour-cast removal, and objective quality metrics."""

from .analysis import (
    ChannelStats,
    Histogram,
    QualityReport,
    cast_score,
    channel_histogram,
    channel_stats,
    quality_report,
)
from .colour import (
    HomomorphicParams,
    fuzzy_homomorphic,
    rgb_to_xyz,
    xyz_cast_removal,
    xyz_to_rgb,
)
from .contrast import (
    ClaheParams,
    GocParams,
    OperatorSpec,
    PwlMap,
    StretchParams,
    cascade,
    clahe,
    goc,
    pwl_apply,
    pwl_from_stats,
    stretch,
)
from .corpus import synthetic_corpus, write_corpus
from .image import ImageBuffer, clamp01, load_image, save_image
from .pde import (
    EvolutionTrace,
    PdeConfig,
    colour_term,
    curvature,
    diffusivity,
    evolve,
    pde_step,
)
from .pipelines import (
    PRESET_NAMES,
    PipelineSpec,
    RunReport,
    Stage,
    diagnose,
    resolve_named,
    run_pa1,
    run_pa2,
    run_pipeline,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelStats",
    "ClaheParams",
    "EvolutionTrace",
    "GocParams",
    "Histogram",
    "HomomorphicParams",
    "ImageBuffer",
    "OperatorSpec",
    "PdeConfig",
    "PipelineSpec",
    "PRESET_NAMES",
    "PwlMap",
    "QualityReport",
    "RunReport",
    "Stage",
    "StretchParams",
    "cascade",
    "cast_score",
    "channel_histogram",
    "channel_stats",
    "clahe",
    "clamp01",
    "colour_term",
    "curvature",
    "diagnose",
    "diffusivity",
    "evolve",
    "fuzzy_homomorphic",
    "goc",
    "load_image",
    "pde_step",
    "pwl_apply",
    "pwl_from_stats",
    "quality_report",
    "resolve_named",
    "rgb_to_xyz",
    "run_pa1",
    "run_pa2",
    "run_pipeline",
    "save_image",
    "stretch",
    "synthetic_corpus",
    "write_corpus",
    "xyz_cast_removal",
    "xyz_to_rgb",
]
