"""End-to-end acceptance checks. Each test prints one PASS line on success
(run with `pytest -s tests/test_acceptance.py` to see them)."""
import numpy as np
import pytest

from uwenh import (
    ClaheParams,
    ImageBuffer,
    PdeConfig,
    cast_score,
    clahe,
    clamp01,
    curvature,
    evolve,
    pde_step,
    rgb_to_xyz,
    xyz_cast_removal,
    xyz_to_rgb,
)
from uwenh.analysis import bin_index
from uwenh.cli import main
from uwenh.corpus import cast_image, synthetic_corpus
from uwenh.pipelines import PRESET_NAMES, resolve_named, run_pa1, run_pa2, run_pipeline


def _report(num: int, text: str) -> None:
    print(f"PASS criterion {num:2d}: {text}")


def _equalize_oracle(plane: np.ndarray, bins: int) -> np.ndarray:
    """Brute-force global histogram equalization: out = CDF(bin(v)) / N."""
    binv = bin_index(plane.ravel(), bins)
    counts = np.bincount(binv, minlength=bins)
    cdf = np.cumsum(counts) / binv.size
    return cdf[binv].reshape(plane.shape)


def test_criterion_1_clahe_oracle_equivalence():
    rng = np.random.default_rng(20260823)
    params = ClaheParams(tiles_x=1, tiles_y=1, bins=256, clip_factor=float("inf"))
    worst = 0.0
    for _ in range(100):
        plane = rng.uniform(0, 1, (16, 16))
        out = clahe(ImageBuffer.from_array(plane[:, :, np.newaxis]), params)
        oracle = _equalize_oracle(plane, 256)
        worst = max(worst, float(np.abs(out.plane(0) - oracle).max()))
    assert worst <= 1 / 256
    _report(1, f"CLAHE matches equalization oracle on 100 images (max diff {worst:.3g})")


def test_criterion_2_curvature_correctness():
    n, s = 256, 128.0
    y, x = np.mgrid[0:n, 0:n].astype(np.float64)
    cx = cy = (n - 1) / 2
    r = np.hypot(x - cx, y - cy)
    bowl = (np.square(x - cx) + np.square(y - cy)) / (2 * s)
    k = curvature(bowl, eps=1e-4)
    annulus = (r >= 20) & (r <= 100)
    rel_err = float((np.abs(k[annulus] - 1.0 / r[annulus]) * r[annulus]).max())
    assert rel_err < 0.05
    assert np.abs(curvature(np.full((32, 32), 0.5))).max() == 0.0
    ramp = np.tile(np.linspace(0, 1, 32), (32, 1))
    assert np.abs(curvature(ramp)[1:-1, 1:-1]).max() == 0.0
    _report(2, f"curvature matches 1/r on the bowl annulus (max rel err {rel_err:.3%})")


def test_criterion_3_telescoping_fidelity():
    rng = np.random.default_rng(31415)
    cfg = PdeConfig(dt=1.0, lambda_diff=0.0, lambda_local=1.0,
                    lambda_global=0.0, lambda_colour=0.0)
    for _ in range(10):
        buf = ImageBuffer.from_array(rng.uniform(0, 1, (16, 16, 3)))
        out = pde_step(buf, cfg)
        expected = clamp01(clahe(buf))
        assert np.array_equal(out.data, expected.data)
    _report(3, "dt=1 unit-gain residual step reproduces CLAHE bit-exactly (10 images)")


def _total_variation(plane: np.ndarray) -> float:
    dx = plane[:, 1:] - plane[:, :-1]
    dy = plane[1:, :] - plane[:-1, :]
    return float(np.sum(np.hypot(dx[:-1, :], dy[:, :-1])))


def test_criterion_4_diffusion_smoothing():
    rng = np.random.default_rng(12345)
    noisy = np.clip(
        np.tile(np.linspace(0.1, 0.9, 32), (32, 1)) + rng.normal(0, 0.08, (32, 32)), 0, 1
    )
    buf = ImageBuffer.from_array(noisy[:, :, np.newaxis])
    cfg = PdeConfig(lambda_diff=0.5, lambda_local=0.0, lambda_colour=0.0,
                    dt=0.1, max_iters=50, tol=0.0)
    out, _ = evolve(buf, cfg)
    tv_in = _total_variation(buf.plane(0))
    tv_out = _total_variation(out.plane(0))
    assert tv_out < 0.9 * tv_in
    _report(4, f"50 diffusion-only steps cut TV {tv_in:.1f} -> {tv_out:.1f} "
               f"(ratio {tv_out / tv_in:.3f} < 0.9)")


def test_criterion_5_colour_term_contrast_law():
    rng = np.random.default_rng(2718)
    vals = 0.5 + rng.uniform(-0.2, 0.2, (16, 16, 3))
    buf = ImageBuffer.from_array(vals)
    cfg = PdeConfig(dt=0.05, lambda_diff=0.0, lambda_local=0.0, lambda_colour=1.0)
    out = pde_step(buf, cfg)
    assert np.array_equal(out.data, np.clip(out.data, 0, 1))
    worst = 0.0
    for c in range(3):
        sigma = buf.plane(c).std()
        expected = sigma * (1.0 + cfg.dt / sigma)
        worst = max(worst, abs(float(out.plane(c).std()) - expected))
    assert worst <= 1e-9
    _report(5, f"colour-term step scales sigma by (1 + dt/sigma) (max err {worst:.2g})")


def test_criterion_6_stability_contract():
    corpus = synthetic_corpus()
    for preset in PRESET_NAMES:
        spec = resolve_named(preset)
        budget = max(st.pde.max_iters for st in spec.stages if st.kind == "pde-evolve")
        for _, buf in corpus:
            out, report = run_pipeline(buf, spec)
            assert np.isfinite(out.data).all()
            assert out.data.min() >= 0.0 and out.data.max() <= 1.0
            assert len(report.trace) <= budget
    _, stress_input = corpus[7]
    stress_cfg = PdeConfig(max_iters=500, tol=0.0)
    out, trace = evolve(stress_input, stress_cfg)
    assert len(trace) == 500
    assert np.isfinite(out.data).all()
    assert out.data.min() >= 0.0 and out.data.max() <= 1.0
    _report(6, f"{len(PRESET_NAMES)} presets x {len(corpus)} corpus images stable; "
               "500-iteration stress run stays in range")


def test_criterion_7_cast_removal():
    results = []
    for k in (0.1, 0.2, 0.3):
        img = cast_image(k)
        s0 = cast_score(img)
        for name, out in (
            ("xyz", xyz_cast_removal(img)),
            ("pa-1", run_pa1(img)[0]),
            ("pa-2", run_pa2(img)[0]),
        ):
            s = cast_score(out)
            assert s <= 0.5 * s0, f"{name} at k={k}: {s:.3f} vs budget {0.5 * s0:.3f}"
            results.append(1 - s / s0)
    _report(7, f"xyz/pa-1/pa-2 reduce cast by >= 50% at k in {{0.1,0.2,0.3}} "
               f"(min reduction {min(results):.0%})")


def test_criterion_8_colour_round_trip():
    rng = np.random.default_rng(161803)
    pixels = rng.uniform(0, 1, (100, 100, 3))
    buf = ImageBuffer.from_array(pixels)
    back = xyz_to_rgb(rgb_to_xyz(buf))
    worst = float(np.abs(back.data - pixels).max())
    assert worst <= 1e-10
    _report(8, f"RGB->XYZ->RGB identity on 10^4 pixels (max err {worst:.2g})")


def test_criterion_9_order_sensitivity():
    best = 0.0
    for name, buf in synthetic_corpus():
        a, _ = run_pipeline(buf, resolve_named("pde-pwl-clahe"))
        b, _ = run_pipeline(buf, resolve_named("pde-clahe-pwl"))
        best = max(best, float(np.abs(a.data - b.data).max()))
        if best > 1e-3:
            break
    assert best > 1e-3
    _report(9, f"pde-pwl-clahe vs pde-clahe-pwl differ (max abs diff {best:.3g} > 1e-3)")


def test_criterion_10_compare_determinism(tmp_path):
    corpus_dir = tmp_path / "corpus"
    assert main(["--seed-corpus", str(corpus_dir)]) == 0
    inputs = sorted(str(p) for p in corpus_dir.iterdir())
    contents = []
    for i, jobs in enumerate(("1", "4", "1")):
        out = tmp_path / f"cmp{i}"
        rc = main(["compare", *inputs, "--pipeline", "pde-clahe-goc2",
                   "--pipeline", "pde-goc2-clahe", "--jobs", jobs, "--out", str(out)])
        assert rc == 0
        contents.append((out / "compare.csv").read_bytes())
    assert contents[0] == contents[1] == contents[2]
    _report(10, "compare CSV byte-identical across reruns and worker counts")
