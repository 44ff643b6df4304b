"""Contrast operators: CLAHE, piecewise-linear maps, percentile stretches,
gain-offset correction, and left-to-right cascades of the above.

All operators are pure [0,1] image -> [0,1] image transforms so they can be
used standalone or as forcing terms inside the PDE evolution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .analysis import bin_index, channel_stats, luminance
from .errors import ImageTooSmallForTilingError, InvalidMapError, NotColourImageError
from .image import ImageBuffer

# ---------------------------------------------------------------------------
# parameter types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClaheParams:
    tiles_x: int = 8
    tiles_y: int = 8
    bins: int = 256
    clip_factor: float = 4.0  # absolute clip = clip_factor * tile_pixels / bins; inf = no clipping
    per_channel: bool = True


@dataclass(frozen=True)
class PwlMap:
    """Monotone piecewise-linear intensity map on [0, 1]."""

    points: tuple  # ((in, out), ...) with in strictly increasing, out non-decreasing

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise InvalidMapError("need at least 2 control points")
        xs = [x for x, _ in pts]
        ys = [y for _, y in pts]
        if xs[0] != 0.0 or xs[-1] != 1.0:
            raise InvalidMapError("first input must be 0 and last input must be 1")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise InvalidMapError("inputs must be strictly increasing")
        if any(b < a for a, b in zip(ys, ys[1:])):
            raise InvalidMapError("outputs must be non-decreasing")
        if min(ys) < 0.0 or max(ys) > 1.0:
            raise InvalidMapError("outputs must lie in [0, 1]")

    @staticmethod
    def identity() -> "PwlMap":
        return PwlMap(((0.0, 0.0), (1.0, 1.0)))

    def apply(self, values: np.ndarray) -> np.ndarray:
        xs = np.array([x for x, _ in self.points])
        ys = np.array([y for _, y in self.points])
        return np.interp(values, xs, ys)


@dataclass(frozen=True)
class StretchParams:
    p_low_frac: float = 0.01
    p_high_frac: float = 0.99
    per_channel: bool = True  # True -> HS behaviour, False -> CS (pooled bounds)

    def __post_init__(self):
        if not 0.0 <= self.p_low_frac < self.p_high_frac <= 1.0:
            raise ValueError("need 0 <= p_low_frac < p_high_frac <= 1")


@dataclass(frozen=True)
class GocParams:
    variant: int = 2  # 2 or 3
    gamma: float = 0.85  # used only by variant 3

    def __post_init__(self):
        if self.variant not in (2, 3):
            raise ValueError("variant must be 2 or 3")
        if self.gamma <= 0.0:
            raise ValueError("gamma must be > 0")


@dataclass(frozen=True)
class OperatorSpec:
    """Declarative description of one contrast/colour operator.

    Recognized names: clahe, pwl, hs, cs, goc2, goc3, identity, cascade.
    """

    name: str
    params: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# CLAHE
# ---------------------------------------------------------------------------


def _tile_edges(size: int, tiles: int) -> list:
    # balanced split: every tile is non-empty whenever size >= tiles, and
    # widths differ by at most one pixel
    return [(t * size // tiles, (t + 1) * size // tiles) for t in range(tiles)]


def _tile_mappings(counts: np.ndarray, npix: np.ndarray, bins: int, clip_factor: float) -> np.ndarray:
    """CDF mappings for all tiles at once; counts is (ntiles, bins) int64.

    Clipping at clip_factor * tile_pixels / bins, excess redistributed
    uniformly in a single pass with the residual spread one count per bin
    starting from bin 0.
    """
    if math.isfinite(clip_factor):
        limit = np.maximum(1, (clip_factor * npix / bins).astype(np.int64))
        clipped = np.minimum(counts, limit[:, None])
        excess = counts.sum(axis=1) - clipped.sum(axis=1)
        clipped = clipped + (excess // bins)[:, None]
        clipped += np.arange(bins)[None, :] < (excess % bins)[:, None]
        counts = clipped
    return np.cumsum(counts, axis=1) / npix[:, None].astype(np.float64)


def _interp_coords(size: int, centers: np.ndarray):
    """Per-pixel lower tile index and bilinear weight along one axis."""
    pos = np.arange(size, dtype=np.float64)
    lo = np.clip(np.searchsorted(centers, pos, side="right") - 1, 0, len(centers) - 1)
    hi = np.minimum(lo + 1, len(centers) - 1)
    w = np.zeros(size)
    interior = hi > lo
    w[interior] = (pos[interior] - centers[lo[interior]]) / (
        centers[hi[interior]] - centers[lo[interior]]
    )
    # pixels beyond the outermost centers clamp to the nearest tile
    w = np.clip(w, 0.0, 1.0)
    return lo, hi, w


def _clahe_plane(plane: np.ndarray, p: ClaheParams) -> np.ndarray:
    h, w = plane.shape
    xe = _tile_edges(w, p.tiles_x)
    ye = _tile_edges(h, p.tiles_y)
    binv = bin_index(np.clip(plane, 0.0, 1.0), p.bins)

    # tile id of every pixel, then one joint bincount over (tile, bin)
    ty_of_row = np.repeat(np.arange(p.tiles_y), [y1 - y0 for y0, y1 in ye])
    tx_of_col = np.repeat(np.arange(p.tiles_x), [x1 - x0 for x0, x1 in xe])
    tid = ty_of_row[:, None] * p.tiles_x + tx_of_col[None, :]
    ntiles = p.tiles_x * p.tiles_y
    counts = np.bincount(
        (tid * p.bins + binv).ravel(), minlength=ntiles * p.bins
    ).reshape(ntiles, p.bins)
    npix = np.bincount(tid.ravel(), minlength=ntiles)
    maps = _tile_mappings(counts, npix, p.bins, p.clip_factor).reshape(
        p.tiles_y, p.tiles_x, p.bins
    )

    cx = np.array([(x0 + x1 - 1) / 2.0 for x0, x1 in xe])
    cy = np.array([(y0 + y1 - 1) / 2.0 for y0, y1 in ye])
    tx0, tx1, wx = _interp_coords(w, cx)
    ty0, ty1, wy = _interp_coords(h, cy)

    ty0g = ty0[:, None]
    ty1g = ty1[:, None]
    tx0g = tx0[None, :]
    tx1g = tx1[None, :]
    v00 = maps[ty0g, tx0g, binv]
    v01 = maps[ty0g, tx1g, binv]
    v10 = maps[ty1g, tx0g, binv]
    v11 = maps[ty1g, tx1g, binv]
    wxg = wx[None, :]
    wyg = wy[:, None]
    out = (1 - wyg) * ((1 - wxg) * v00 + wxg * v01) + wyg * ((1 - wxg) * v10 + wxg * v11)
    return np.clip(out, 0.0, 1.0)


def clahe(buf: ImageBuffer, p: ClaheParams = ClaheParams()) -> ImageBuffer:
    """Contrast-limited adaptive histogram equalization.

    Tile mapping is the clipped-histogram CDF scaled to [0, 1]; pixels are
    bilinearly interpolated between the four nearest tile-center mappings.
    """
    if buf.width < p.tiles_x or buf.height < p.tiles_y:
        raise ImageTooSmallForTilingError(
            f"{buf.width}x{buf.height} image cannot host a {p.tiles_x}x{p.tiles_y} tile grid"
        )
    if p.per_channel or buf.channels == 1:
        planes = [_clahe_plane(buf.plane(c), p) for c in range(buf.channels)]
        return ImageBuffer.from_array(np.stack(planes, axis=2))
    # luminance-only mode: equalize the channel mean, rescale channels by its gain
    lum = luminance(buf)
    lum2 = _clahe_plane(lum, p)
    ratio = lum2 / np.maximum(lum, 1e-6)
    return ImageBuffer.from_array(np.clip(buf.data * ratio[:, :, None], 0.0, 1.0))


# ---------------------------------------------------------------------------
# piecewise-linear transforms
# ---------------------------------------------------------------------------


def pwl_apply(buf: ImageBuffer, pwl: PwlMap) -> ImageBuffer:
    """Map every value through the piecewise-linear curve."""
    return ImageBuffer.from_array(pwl.apply(buf.data))


def pwl_from_stats(buf: ImageBuffer, p_low_frac: float = 0.02, p_high_frac: float = 0.98) -> PwlMap:
    """4-point percentile stretch map built from pooled-luminance percentiles."""
    lum = ImageBuffer.from_array(luminance(buf))
    st = channel_stats(lum, 0, p_low_frac=max(p_low_frac, 1e-12), p_high_frac=min(p_high_frac, 1 - 1e-12))
    p_low, p_high = st.p_low, st.p_high
    if p_high - p_low < 1e-9:
        return PwlMap.identity()
    pts = [(0.0, 0.0)]
    if p_low > 0.0:
        pts.append((p_low, 0.0))
    if p_high < 1.0:
        pts.append((p_high, 1.0))
    pts.append((1.0, 1.0))
    return PwlMap(tuple(pts))


# ---------------------------------------------------------------------------
# percentile stretch (HS / CS)
# ---------------------------------------------------------------------------

_DEGENERATE_SPAN = 1e-6


def _hist_percentiles(values: np.ndarray, p_low_frac: float, p_high_frac: float, bins: int = 256):
    buf = ImageBuffer.from_array(values.reshape(-1, 1).astype(np.float64))
    st = channel_stats(buf, 0, bins=bins,
                       p_low_frac=p_low_frac, p_high_frac=max(p_high_frac, p_low_frac + 1e-12))
    return st.p_low, st.p_high


def stretch_with_flags(buf: ImageBuffer, p: StretchParams):
    """Affine percentile stretch; returns (image, per-channel degeneracy flags)."""
    data = buf.data
    out = np.empty_like(data)
    flags = []
    if p.per_channel:
        bounds = [
            _hist_percentiles(data[:, :, c], p.p_low_frac, p.p_high_frac)
            for c in range(buf.channels)
        ]
    else:
        pooled = _hist_percentiles(data.ravel(), p.p_low_frac, p.p_high_frac)
        bounds = [pooled] * buf.channels
    for c, (lo, hi) in enumerate(bounds):
        if hi - lo < _DEGENERATE_SPAN:
            out[:, :, c] = data[:, :, c]
            flags.append(True)
        else:
            out[:, :, c] = np.clip((data[:, :, c] - lo) / (hi - lo), 0.0, 1.0)
            flags.append(False)
    return ImageBuffer.from_array(out), tuple(flags)


def stretch(buf: ImageBuffer, p: StretchParams) -> ImageBuffer:
    return stretch_with_flags(buf, p)[0]


# ---------------------------------------------------------------------------
# gain-offset correction (GOC2 / GOC3)
# ---------------------------------------------------------------------------


def goc(buf: ImageBuffer, p: GocParams = GocParams()) -> ImageBuffer:
    """Gray-world mean alignment followed by a pooled full-range stretch.

    Variant 3 additionally applies an elementwise gamma. Grayscale inputs
    take the stretch-only pass-through path (no mean offsets possible).
    """
    data = buf.data
    if buf.channels == 3:
        means = data.reshape(-1, 3).mean(axis=0)
        shifted = data + (means.mean() - means)[None, None, :]
    else:
        shifted = data
    mn, mx = shifted.min(), shifted.max()
    if mx - mn >= _DEGENERATE_SPAN:
        shifted = (shifted - mn) / (mx - mn)
    out = np.clip(shifted, 0.0, 1.0)
    if p.variant == 3:
        out = out ** p.gamma
    return ImageBuffer.from_array(out)


# ---------------------------------------------------------------------------
# operator dispatch and cascades
# ---------------------------------------------------------------------------


def apply_operator(buf: ImageBuffer, spec: OperatorSpec) -> ImageBuffer:
    """Run one declaratively-specified operator."""
    name = spec.name
    prm = spec.params
    if name == "identity":
        return buf
    if name == "clahe":
        return clahe(buf, ClaheParams(**prm))
    if name == "pwl":
        if "points" in prm:
            pwl = PwlMap(tuple(tuple(pt) for pt in prm["points"]))
        else:
            pwl = pwl_from_stats(
                buf,
                p_low_frac=prm.get("p_low_frac", 0.02),
                p_high_frac=prm.get("p_high_frac", 0.98),
            )
        return pwl_apply(buf, pwl)
    if name in ("hs", "cs"):
        return stretch(
            buf,
            StretchParams(
                p_low_frac=prm.get("p_low_frac", 0.01),
                p_high_frac=prm.get("p_high_frac", 0.99),
                per_channel=(name == "hs"),
            ),
        )
    if name in ("goc2", "goc3"):
        return goc(buf, GocParams(variant=int(name[-1]), gamma=prm.get("gamma", 0.85)))
    if name == "cascade":
        return cascade(buf, prm["stages"])
    raise ValueError(f"unknown operator {name!r}")


def cascade(buf: ImageBuffer, stages: Sequence[OperatorSpec]) -> ImageBuffer:
    """Left-to-right composition: cascade(b, [A, B]) = B(A(b))."""
    out = buf
    for stage in stages:
        out = apply_operator(out, stage)
    return out


def operator_spec_to_dict(spec: OperatorSpec) -> dict:
    prm = dict(spec.params)
    if spec.name == "cascade":
        prm["stages"] = [operator_spec_to_dict(s) for s in spec.params["stages"]]
    return {"name": spec.name, "params": prm}


def operator_spec_from_dict(d: dict) -> OperatorSpec:
    prm = dict(d.get("params", {}))
    if d["name"] == "cascade":
        prm["stages"] = [operator_spec_from_dict(s) for s in prm["stages"]]
    return OperatorSpec(d["name"], prm)
