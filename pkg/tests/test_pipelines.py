import numpy as np
import pytest

from uwenh import (
    ImageBuffer,
    OperatorSpec,
    cast_score,
    evolve,
    stretch,
    xyz_cast_removal,
)
from uwenh.contrast import StretchParams
from uwenh.corpus import cast_image
from uwenh.errors import NotColourImageError, UnknownPipelineError
from uwenh.pipelines import (
    PRESET_NAMES,
    PipelineSpec,
    Stage,
    diagnose,
    is_dark_or_faded,
    pipeline_from_json,
    pipeline_to_json,
    resolve_named,
    run_pa1,
    run_pa2,
    run_pipeline,
)

from conftest import random_buffer


# ---------------------------------------------------------------------------
# resolve_named
# ---------------------------------------------------------------------------


def test_all_presets_resolve():
    for name in PRESET_NAMES:
        spec = resolve_named(name)
        assert spec.name == name
        assert len(spec.stages) >= 1


def test_resolve_is_stable():
    for name in PRESET_NAMES:
        assert resolve_named(name) == resolve_named(name)


def test_resolve_unknown_name():
    with pytest.raises(UnknownPipelineError):
        resolve_named("pde-xyz-magic")


def test_preset_name_encodes_operator_order():
    spec = resolve_named("pde-pwl-clahe")
    stages = spec.stages[0].pde.local_op.params["stages"]
    assert [s.name for s in stages] == ["pwl", "clahe"]
    spec2 = resolve_named("pde-clahe-pwl")
    stages2 = spec2.stages[0].pde.local_op.params["stages"]
    assert [s.name for s in stages2] == ["clahe", "pwl"]


def test_spec_requires_stages():
    with pytest.raises(ValueError):
        PipelineSpec("empty", ())
    with pytest.raises(ValueError):
        Stage("warp-drive")


# ---------------------------------------------------------------------------
# run_pipeline
# ---------------------------------------------------------------------------


def test_single_identity_stage(rng):
    buf = random_buffer(rng, 8, 8)
    spec = PipelineSpec(
        "ident",
        (Stage("operator", operator=OperatorSpec("pwl", {"points": [(0.0, 0.0), (1.0, 1.0)]})),),
    )
    out, report = run_pipeline(buf, spec)
    assert np.array_equal(out.data, buf.data)
    assert len(report.stages) == 1 and not report.stages[0].skipped


def test_pipeline_matches_direct_evolve(corpus):
    # two-path equivalence: the executor adds nothing beyond the module call
    _, buf = corpus[2]
    spec = resolve_named("pde-pwl-clahe")
    out_pipe, report = run_pipeline(buf, spec)
    out_direct, trace = evolve(buf, spec.stages[0].pde)
    assert np.array_equal(out_pipe.data, out_direct.data)
    assert report.trace.entries == trace.entries


def test_pipeline_matches_manual_composition(corpus):
    _, buf = corpus[3]
    spec = PipelineSpec(
        "two",
        (
            Stage("xyz-cast-removal"),
            Stage("operator", operator=OperatorSpec("hs", {})),
        ),
    )
    out, _ = run_pipeline(buf, spec)
    manual = stretch(xyz_cast_removal(buf), StretchParams(per_channel=True))
    assert np.array_equal(out.data, manual.data)


def test_pipeline_deterministic(corpus):
    _, buf = corpus[4]
    spec = resolve_named("pde-clahe-goc2")
    a, _ = run_pipeline(buf, spec)
    b, _ = run_pipeline(buf, spec)
    assert np.array_equal(a.data, b.data)


def test_every_preset_runs_in_range(corpus):
    # the full corpus sweep lives in the acceptance suite; one image here
    _, buf = corpus[5]
    for name in PRESET_NAMES:
        out, _ = run_pipeline(buf, resolve_named(name))
        assert np.isfinite(out.data).all()
        assert out.data.min() >= 0.0 and out.data.max() <= 1.0


def test_conditional_stage_runs_on_dark_input(rng):
    dark = ImageBuffer.from_array(rng.uniform(0.0, 0.2, (12, 12, 3)))
    assert is_dark_or_faded(dark)
    spec = PipelineSpec("fin", (Stage("pwl-finisher", only_if_dark=True),))
    out, report = run_pipeline(dark, spec)
    assert not report.stages[0].skipped
    assert out.data.max() > dark.data.max()  # the stretch expanded the range


def test_conditional_stage_skipped_on_bright_input(rng):
    plane = rng.uniform(0, 1, (12, 12))
    plane[0, 0], plane[0, 1] = 0.0, 1.0
    bright = ImageBuffer.from_array(np.stack([plane] * 3, axis=2))
    assert not is_dark_or_faded(bright)
    spec = PipelineSpec("fin", (Stage("pwl-finisher", only_if_dark=True),))
    out, report = run_pipeline(bright, spec)
    assert report.stages[0].skipped
    assert np.array_equal(out.data, bright.data)


def test_report_rows_mark_skips(rng):
    plane = rng.uniform(0, 1, (12, 12))
    plane[0, 0], plane[0, 1] = 0.0, 1.0
    bright = ImageBuffer.from_array(np.stack([plane] * 3, axis=2))
    spec = PipelineSpec("fin", (Stage("pwl-finisher", only_if_dark=True),))
    _, report = run_pipeline(bright, spec)
    rows = report.csv_rows()
    assert rows[0][0] == "input"
    assert rows[1][1] == "skipped"


# ---------------------------------------------------------------------------
# pa-1 / pa-2
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("k", [0.1, 0.2, 0.3])
def test_pa1_reduces_cast(k):
    img = cast_image(k)
    out, _ = run_pa1(img)
    assert cast_score(out) < cast_score(img)


@pytest.mark.parametrize("k", [0.1, 0.2, 0.3])
def test_pa2_reduces_cast(k):
    img = cast_image(k)
    out, _ = run_pa2(img)
    assert cast_score(out) < cast_score(img)


def test_pa_reject_grayscale():
    buf = ImageBuffer.from_array(np.full((8, 8, 1), 0.5))
    with pytest.raises(NotColourImageError):
        run_pa1(buf)
    with pytest.raises(NotColourImageError):
        run_pa2(buf)


def test_pa1_finisher_skipped_on_neutral_image(rng):
    plane = rng.uniform(0, 1, (16, 16))
    plane[0, 0], plane[0, 1] = 0.0, 1.0
    buf = ImageBuffer.from_array(np.stack([plane] * 3, axis=2))
    _, report = run_pa1(buf)
    labels = {r.label: r.skipped for r in report.stages}
    assert labels["pwl-finisher"] is True


def test_pa2_simpler_than_pa1():
    assert len(resolve_named("pa-2").stages) < len(resolve_named("pa-1").stages)


def test_pa2_optional_fuzzy_stage(rng):
    buf = ImageBuffer.from_array(rng.uniform(0, 1, (16, 16, 3)))
    _, plain = run_pa2(buf)
    _, with_fuzzy = run_pa2(buf, include_fuzzy=True)
    assert len(with_fuzzy.stages) == len(plain.stages) + 1
    assert with_fuzzy.stages[2].label == "fuzzy-homomorphic"


def test_pa2_xyz_stage_near_identity_on_neutral_image(rng):
    # zero cast, full range: the evolved image saturates at 0 and 1, so the
    # XYZ-space stretch has nothing to move
    plane = rng.uniform(0, 1, (32, 32))
    plane[0, 0], plane[0, 1] = 0.0, 1.0
    buf = ImageBuffer.from_array(np.stack([plane] * 3, axis=2))
    evolved, _ = evolve(buf, resolve_named("pa-2").stages[0].pde)
    after = xyz_cast_removal(evolved)
    assert np.abs(after.data - evolved.data).max() < 1e-6


def test_operator_order_is_observable(corpus):
    diffs = []
    for _, buf in corpus:
        a, _ = run_pipeline(buf, resolve_named("pde-pwl-clahe"))
        b, _ = run_pipeline(buf, resolve_named("pde-clahe-pwl"))
        diffs.append(np.abs(a.data - b.data).max())
        if diffs[-1] > 1e-3:
            break
    assert max(diffs) > 1e-3


# ---------------------------------------------------------------------------
# diagnose
# ---------------------------------------------------------------------------


def test_diagnose_gray_suggests_operator_presets(rng):
    plane = rng.uniform(0, 1, (8, 8))
    buf = ImageBuffer.from_array(np.stack([plane] * 3, axis=2))
    res = diagnose(buf)
    assert res.cast_score == 0.0
    assert res.hint == "fig2"
    assert all(n.startswith("pde-") for n in res.suggested)
    assert len(res.histograms) == 3


def test_diagnose_strong_cast_suggests_pa():
    arr = np.stack([np.full((4, 4), 0.2), np.full((4, 4), 0.5), np.full((4, 4), 0.8)], axis=2)
    res = diagnose(ImageBuffer.from_array(arr))
    assert res.cast_score == pytest.approx(0.6, abs=1e-12)
    assert res.hint == "pa"
    assert res.suggested == ("pa-1", "pa-2")


def test_diagnose_threshold_is_strict():
    arr = np.stack([np.full((4, 4), 0.4), np.full((4, 4), 0.4), np.full((4, 4), 0.55)], axis=2)
    res = diagnose(ImageBuffer.from_array(arr))
    assert res.cast_score == pytest.approx(0.15, abs=1e-12)
    assert res.hint == "fig2"  # strictly-greater rule


def test_diagnose_rejects_grayscale():
    with pytest.raises(NotColourImageError):
        diagnose(ImageBuffer.from_array(np.full((4, 4, 1), 0.5)))


# ---------------------------------------------------------------------------
# config (de)serialization
# ---------------------------------------------------------------------------


def test_json_round_trip_all_presets():
    for name in PRESET_NAMES:
        spec = resolve_named(name)
        assert pipeline_from_json(pipeline_to_json(spec)) == spec


def test_json_round_trip_executes_identically(corpus):
    _, buf = corpus[6]
    spec = resolve_named("pde-goc2-clahe")
    loaded = pipeline_from_json(pipeline_to_json(spec))
    a, _ = run_pipeline(buf, spec)
    b, _ = run_pipeline(buf, loaded)
    assert np.array_equal(a.data, b.data)
