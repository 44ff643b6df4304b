"""Per-channel statistics, histogram diagnostics and no-reference quality metrics."""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import ChannelOutOfRangeError, NotColourImageError
from .image import ImageBuffer

DEFAULT_BINS = 256

QUALITY_CSV_HEADER = (
    "image_id",
    "entropy",
    "rms_contrast",
    "colourfulness",
    "mean_gradient",
    "cast_score",
)


@dataclass(frozen=True)
class Histogram:
    """Fixed-range [0, 1] histogram; bin i covers [i/B, (i+1)/B), last bin closed."""

    bins: int
    counts: np.ndarray  # int64, length == bins

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.counts)


@dataclass(frozen=True)
class ChannelStats:
    mean: float
    std: float  # population convention
    mode: float  # center of the fullest histogram bin, ties -> lowest index
    min: float
    max: float
    p_low: float
    p_high: float


@dataclass(frozen=True)
class QualityReport:
    entropy: float
    rms_contrast: float
    colourfulness: float
    mean_gradient: float
    cast_score: float

    def csv_row(self, image_id: str) -> list:
        return [image_id] + [f"{getattr(self, f.name):.9g}" for f in fields(self)]


def bin_index(values: np.ndarray, bins: int) -> np.ndarray:
    """Deterministic bin assignment: min(B-1, floor(v*B))."""
    return np.minimum(bins - 1, np.floor(values * bins).astype(np.int64))


def channel_histogram(buf: ImageBuffer, channel: int, bins: int = DEFAULT_BINS) -> Histogram:
    if not 0 <= channel < buf.channels:
        raise ChannelOutOfRangeError(f"channel {channel} of {buf.channels}")
    if bins < 2:
        raise ValueError("bins must be >= 2")
    idx = bin_index(buf.plane(channel).ravel(), bins)
    counts = np.bincount(idx, minlength=bins)
    return Histogram(bins=bins, counts=counts.astype(np.int64))


def _percentile_from_hist(hist: Histogram, frac: float, vmin: float, vmax: float) -> float:
    """Histogram-CDF percentile: center of the first bin whose CDF reaches frac.

    frac <= 0 / >= 1 return the exact channel min / max; interior results
    are clipped into [vmin, vmax] so the ordering invariant holds.
    """
    if frac <= 0.0:
        return vmin
    if frac >= 1.0:
        return vmax
    target = frac * hist.total
    b = int(np.searchsorted(hist.cdf(), target))
    b = min(b, hist.bins - 1)
    center = (b + 0.5) / hist.bins
    return float(np.clip(center, vmin, vmax))


def channel_stats(
    buf: ImageBuffer,
    channel: int,
    bins: int = DEFAULT_BINS,
    p_low_frac: float = 0.02,
    p_high_frac: float = 0.98,
) -> ChannelStats:
    if not 0.0 <= p_low_frac < p_high_frac <= 1.0:
        raise ValueError("need 0 <= p_low_frac < p_high_frac <= 1")
    hist = channel_histogram(buf, channel, bins)
    # sorted reduction order: stats are invariant under pixel permutations
    vals = np.sort(buf.plane(channel), axis=None)
    vmin = float(vals[0])
    vmax = float(vals[-1])
    mean = float(vals.mean())
    # population (divide by N) convention; exactly 0 for constant channels
    std = 0.0 if vmin == vmax else float(vals.std())
    mode_bin = int(np.argmax(hist.counts))  # argmax takes the lowest tied index
    return ChannelStats(
        mean=mean,
        std=std,
        mode=(mode_bin + 0.5) / bins,
        min=vmin,
        max=vmax,
        p_low=_percentile_from_hist(hist, p_low_frac, vmin, vmax),
        p_high=_percentile_from_hist(hist, p_high_frac, vmin, vmax),
    )


def cast_score(buf: ImageBuffer) -> float:
    """Channel-mean misalignment: max over channel pairs of |mu_a - mu_b|."""
    if buf.channels != 3:
        raise NotColourImageError("cast_score requires 3 channels")
    means = buf.data.reshape(-1, 3).mean(axis=0)
    return float(means.max() - means.min())


def luminance(buf: ImageBuffer) -> np.ndarray:
    """Channel mean as the luminance proxy, shape (h, w)."""
    return buf.data.mean(axis=2)


def _entropy_bits(plane: np.ndarray, bins: int = DEFAULT_BINS) -> float:
    counts = np.bincount(bin_index(plane.ravel(), bins), minlength=bins)
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log2(p)).sum())


def mean_gradient(plane: np.ndarray) -> float:
    """Mean central-difference gradient magnitude (replicate-edge padding)."""
    p = np.pad(plane, 1, mode="edge")
    gx = (p[1:-1, 2:] - p[1:-1, :-2]) / 2.0
    gy = (p[2:, 1:-1] - p[:-2, 1:-1]) / 2.0
    return float(np.hypot(gx, gy).mean())


def colourfulness(buf: ImageBuffer) -> float:
    """Hasler-Suesstrunk colourfulness statistic; 0 for grayscale."""
    if buf.channels != 3:
        return 0.0
    r, g, b = buf.plane(0), buf.plane(1), buf.plane(2)
    rg = r - g
    yb = (r + g) / 2.0 - b
    return float(
        np.hypot(rg.std(), yb.std()) + 0.3 * np.hypot(rg.mean(), yb.mean())
    )


def quality_report(buf: ImageBuffer) -> QualityReport:
    buf.require_finite()
    lum = luminance(buf)
    entropy = float(np.mean([_entropy_bits(buf.plane(c)) for c in range(buf.channels)]))
    return QualityReport(
        entropy=entropy,
        rms_contrast=0.0 if lum.min() == lum.max() else float(lum.std()),
        colourfulness=colourfulness(buf),
        mean_gradient=mean_gradient(lum),
        cast_score=cast_score(buf) if buf.channels == 3 else 0.0,
    )
