"""Colour machinery: RGB<->XYZ conversion, the XYZ-space cast-removal core,
and the optional fuzzy homomorphic enhancement stage."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NotColourImageError
from .image import ImageBuffer

# sRGB primaries, D65 white point (linear RGB -> XYZ)
RGB_TO_XYZ_MATRIX = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
XYZ_TO_RGB_MATRIX = np.linalg.inv(RGB_TO_XYZ_MATRIX)

_SRGB_GAMMA = 2.4


def _require_colour(buf: ImageBuffer, op: str) -> None:
    if buf.channels != 3:
        raise NotColourImageError(f"{op} requires 3 channels")


def _srgb_decode(data: np.ndarray) -> np.ndarray:
    lo = data <= 0.04045
    return np.where(lo, data / 12.92, ((data + 0.055) / 1.055) ** _SRGB_GAMMA)


def _srgb_encode(data: np.ndarray) -> np.ndarray:
    d = np.clip(data, 0.0, 1.0)
    lo = d <= 0.0031308
    return np.where(lo, d * 12.92, 1.055 * d ** (1.0 / _SRGB_GAMMA) - 0.055)


def rgb_to_xyz(buf: ImageBuffer, decode_srgb: bool = False) -> ImageBuffer:
    """Linear D65 RGB -> XYZ. Output is NOT clamped (Z of white ~= 1.089)."""
    _require_colour(buf, "rgb_to_xyz")
    data = _srgb_decode(buf.data) if decode_srgb else buf.data
    return ImageBuffer.from_array(data @ RGB_TO_XYZ_MATRIX.T)


def xyz_to_rgb(buf: ImageBuffer, encode_srgb: bool = False) -> ImageBuffer:
    """Inverse conversion; RGB output clamped to [0, 1]."""
    _require_colour(buf, "xyz_to_rgb")
    rgb = buf.data @ XYZ_TO_RGB_MATRIX.T
    if encode_srgb:
        return ImageBuffer.from_array(_srgb_encode(rgb))
    return ImageBuffer.from_array(np.clip(rgb, 0.0, 1.0))


_DEGENERATE_SPAN = 1e-9


# XYZ of the RGB white point (1,1,1); the full-range target of each plane.
WHITE_XYZ = RGB_TO_XYZ_MATRIX.sum(axis=1)


def xyz_cast_removal(buf: ImageBuffer) -> ImageBuffer:
    """Colour-cast removal core: full-range stretch of each XYZ plane.

    RGB -> XYZ, each plane independently stretched over its own min/max to
    span the white-point axis [0, W_c] (so the stretched maximum maps back
    to neutral white rather than to a tinted gray), then back to clamped
    RGB. Constant planes pass through unchanged.
    """
    _require_colour(buf, "xyz_cast_removal")
    xyz = rgb_to_xyz(buf).data.copy()
    for c in range(3):
        plane = xyz[:, :, c]
        mn, mx = plane.min(), plane.max()
        if mx - mn >= _DEGENERATE_SPAN:
            xyz[:, :, c] = WHITE_XYZ[c] * (plane - mn) / (mx - mn)
    return xyz_to_rgb(ImageBuffer.from_array(xyz))


@dataclass(frozen=True)
class HomomorphicParams:
    gamma_low: float = 0.5  # low-frequency (illumination) gain
    gamma_high: float = 2.0  # high-frequency (reflectance) gain
    sharpness_c: float = 1.0
    cutoff_frac: float = 0.05  # D0 = cutoff_frac * min(width, height)
    log_floor: float = 1e-3
    fuzzy_enabled: bool = True
    fuzzy_slope: float = 8.0
    fuzzy_center: Optional[float] = None  # None -> per-channel mean

    def __post_init__(self):
        if not self.gamma_high >= self.gamma_low > 0.0:
            raise ValueError("need gamma_high >= gamma_low > 0")
        if self.log_floor <= 0.0:
            raise ValueError("log_floor must be > 0")


def _high_emphasis_filter(h: int, w: int, d0: float, p: HomomorphicParams) -> np.ndarray:
    # radial distance on the centered spectrum, in index units (fftfreq * n)
    fy = np.fft.fftfreq(h) * h
    fx = np.fft.fftfreq(w) * w
    d2 = fy[:, None] ** 2 + fx[None, :] ** 2
    return p.gamma_low + (p.gamma_high - p.gamma_low) * (
        1.0 - np.exp(-p.sharpness_c * d2 / (d0 * d0))
    )


def _fuzzy_remap(plane: np.ndarray, p: HomomorphicParams) -> np.ndarray:
    b = p.fuzzy_center if p.fuzzy_center is not None else float(plane.mean())
    s = 1.0 / (1.0 + np.exp(-p.fuzzy_slope * (plane - b)))
    s_lo = 1.0 / (1.0 + np.exp(-p.fuzzy_slope * (plane.min() - b)))
    s_hi = 1.0 / (1.0 + np.exp(-p.fuzzy_slope * (plane.max() - b)))
    if s_hi - s_lo < 1e-12:  # constant channel: pass through
        return plane
    return (s - s_lo) / (s_hi - s_lo)


def fuzzy_homomorphic(buf: ImageBuffer, p: HomomorphicParams = HomomorphicParams()) -> ImageBuffer:
    """Homomorphic high-emphasis filtering plus sigmoid contrast remap.

    Per channel: floor at log_floor, log, FFT filtering with the Gaussian
    high-emphasis transfer, exp, then (optionally) the fuzzy sigmoid remap
    rescaled so the channel min maps to 0 and max to 1. Clamped output.
    """
    buf.require_finite()
    d0 = max(p.cutoff_frac * min(buf.width, buf.height), 1e-6)
    out = np.empty_like(buf.data)
    for c in range(buf.channels):
        plane = buf.plane(c)
        logged = np.log(np.maximum(plane, p.log_floor))
        # pad to even dims with edge replication to avoid wrap-around halos
        ph = logged.shape[0] % 2
        pw = logged.shape[1] % 2
        padded = np.pad(logged, ((0, ph), (0, pw)), mode="edge")
        hfilt = _high_emphasis_filter(padded.shape[0], padded.shape[1], d0, p)
        filtered = np.fft.ifft2(np.fft.fft2(padded) * hfilt).real
        result = np.exp(filtered[: logged.shape[0], : logged.shape[1]])
        if p.fuzzy_enabled:
            result = _fuzzy_remap(result, p)
        out[:, :, c] = np.clip(result, 0.0, 1.0)
    return ImageBuffer.from_array(out)
