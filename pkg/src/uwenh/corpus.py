"""Bundled synthetic test corpus: 24 deterministic 64x64 RGB images.

The images cover the situations the pipelines are meant to handle: colour
casts of increasing strength, low-contrast and dark scenes, textured and
noisy content. Generation is fully seeded so every call returns the same
pixels.
"""
from __future__ import annotations

import os
from typing import List, Tuple

import numpy as np

from .image import ImageBuffer, save_image

CORPUS_SIZE = 64
_SEED = 74210


def _rng(tag: int) -> np.random.Generator:
    return np.random.default_rng(_SEED + tag)


def _coords(n: int = CORPUS_SIZE):
    y, x = np.mgrid[0:n, 0:n].astype(np.float64)
    return x / (n - 1), y / (n - 1)


def textured_base(tag: int = 0, n: int = CORPUS_SIZE) -> np.ndarray:
    """Gray textured scene: diagonal gradient + blobs + mild noise, one channel."""
    x, y = _coords(n)
    rng = _rng(tag)
    base = 0.25 + 0.5 * (x + y) / 2.0
    for _ in range(4):
        cx, cy = rng.uniform(0.15, 0.85, size=2)
        r = rng.uniform(0.08, 0.2)
        amp = rng.uniform(-0.18, 0.18)
        base = base + amp * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * r * r))
    base = base + rng.normal(0.0, 0.02, size=base.shape)
    return np.clip(base, 0.02, 0.98)


def cast_image(k: float, tag: int = 0, n: int = CORPUS_SIZE) -> ImageBuffer:
    """Synthetic blue cast: R = G = textured base, B = clamp(R + k)."""
    base = textured_base(tag, n)
    return ImageBuffer.from_array(
        np.stack([base, base, np.clip(base + k, 0.0, 1.0)], axis=2)
    )


def _gray3(plane: np.ndarray) -> np.ndarray:
    return np.stack([plane] * 3, axis=2)


def synthetic_corpus() -> List[Tuple[str, ImageBuffer]]:
    """The 24 bundled images as (name, buffer) pairs, deterministic order."""
    n = CORPUS_SIZE
    x, y = _coords(n)
    images: List[Tuple[str, ImageBuffer]] = []

    # blue-cast family over textured bases
    for i, k in enumerate((0.1, 0.2, 0.3)):
        images.append((f"cast_blue_{int(k * 100):02d}", cast_image(k, tag=i)))

    # green casts (typical shallow-water tint)
    for i, k in enumerate((0.15, 0.25)):
        base = textured_base(10 + i)
        arr = np.stack([0.8 * base, np.clip(base + k, 0, 1), base], axis=2)
        images.append((f"cast_green_{int(k * 100):02d}", ImageBuffer.from_array(arr)))

    # attenuated red channel (deep-water look)
    base = textured_base(12)
    arr = np.stack([0.35 * base + 0.05, 0.8 * base + 0.1, np.clip(base + 0.2, 0, 1)], axis=2)
    images.append(("deep_water", ImageBuffer.from_array(arr)))

    # gradients with noise at several noise levels
    for i, s in enumerate((0.02, 0.06, 0.12)):
        rng = _rng(20 + i)
        plane = np.clip(x * 0.8 + 0.1 + rng.normal(0, s, x.shape), 0.02, 0.98)
        images.append((f"noisy_gradient_{int(s * 100):02d}", ImageBuffer.from_array(_gray3(plane))))

    # low-contrast scenes around different pedestals
    for i, (lo, hi) in enumerate(((0.35, 0.6), (0.1, 0.3), (0.6, 0.85))):
        plane = lo + (hi - lo) * textured_base(30 + i)
        images.append((f"low_contrast_{i}", ImageBuffer.from_array(_gray3(plane))))

    # dark scene (triggers the dark/faded finisher path)
    plane = 0.03 + 0.22 * textured_base(40)
    images.append(("dark_scene", ImageBuffer.from_array(_gray3(plane))))

    # blurred checkerboard (structured edges)
    cells = ((np.floor(x * 8) + np.floor(y * 8)) % 2)
    smooth = 0.2 + 0.6 * cells
    for _ in range(3):  # cheap box blur
        p = np.pad(smooth, 1, mode="edge")
        smooth = (p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] + p[1:-1, 1:-1]) / 5.0
    images.append(("checkerboard", ImageBuffer.from_array(_gray3(smooth))))

    # radial vignette over colour texture
    r2 = (x - 0.5) ** 2 + (y - 0.5) ** 2
    vig = np.exp(-r2 / 0.18)
    arr = np.stack(
        [textured_base(50) * vig, textured_base(51) * vig, textured_base(52) * vig], axis=2
    )
    images.append(("vignette", ImageBuffer.from_array(np.clip(arr, 0.01, 1.0))))

    # independent-channel noise fields
    for i in range(3):
        rng = _rng(60 + i)
        arr = np.clip(rng.normal(0.5, 0.15, size=(n, n, 3)), 0.0, 1.0)
        images.append((f"noise_field_{i}", ImageBuffer.from_array(arr)))

    # mixed scenes: cast + vignette, cast + noise, faded haze
    base = textured_base(70)
    arr = np.stack([base * vig, base * vig, np.clip(base + 0.2, 0, 1) * vig], axis=2)
    images.append(("cast_vignette", ImageBuffer.from_array(np.clip(arr, 0.01, 1.0))))

    rng = _rng(71)
    base = textured_base(71)
    noisy = np.clip(base + rng.normal(0, 0.05, base.shape), 0, 1)
    arr = np.stack([0.7 * noisy, noisy, np.clip(noisy + 0.25, 0, 1)], axis=2)
    images.append(("cast_noisy", ImageBuffer.from_array(arr)))

    haze = 0.55 + 0.25 * textured_base(72)
    arr = np.stack([haze * 0.92, haze, np.clip(haze * 1.05, 0, 1)], axis=2)
    images.append(("faded_haze", ImageBuffer.from_array(arr)))

    # sinusoidal interference pattern
    plane = 0.5 + 0.3 * np.sin(2 * np.pi * 4 * x) * np.cos(2 * np.pi * 3 * y)
    images.append(("sinusoid", ImageBuffer.from_array(_gray3(np.clip(plane, 0, 1)))))

    # hue wheel-ish smooth colour field
    arr = np.stack(
        [0.5 + 0.4 * np.sin(2 * np.pi * x), 0.5 + 0.4 * np.sin(2 * np.pi * y),
         0.5 + 0.4 * np.sin(2 * np.pi * (x + y))],
        axis=2,
    )
    images.append(("colour_waves", ImageBuffer.from_array(np.clip(arr, 0, 1))))

    # bright faded scene
    plane = 0.7 + 0.25 * textured_base(80)
    images.append(("bright_faded", ImageBuffer.from_array(_gray3(np.clip(plane, 0, 1)))))

    assert len(images) == 24
    return images


def write_corpus(out_dir: str, bit_depth: int = 8) -> List[str]:
    """Write the corpus to disk as PNGs; returns the file paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, buf in synthetic_corpus():
        path = os.path.join(out_dir, f"{name}.png")
        save_image(buf, path, bit_depth=bit_depth)
        paths.append(path)
    return paths
