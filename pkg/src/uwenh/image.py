"""Raster data model and PNG/PPM file I/O.

Images are stored as float64 arrays of shape (height, width, channels)
with channels in {1, 3} and values nominally in [0, 1]. Buffers are
treated as immutable: every operation returns a new buffer.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import cv2
import numpy as np

from .errors import (
    CorruptDataError,
    InvalidBufferStateError,
    UnsupportedFormatError,
)


@dataclass(frozen=True)
class ImageBuffer:
    """Dense real-valued raster, 1 or 3 channels."""

    data: np.ndarray  # (h, w, c) float64

    def __post_init__(self):
        arr = self.data
        if not isinstance(arr, np.ndarray) or arr.ndim != 3:
            raise InvalidBufferStateError("data must be a (h, w, c) array")
        h, w, c = arr.shape
        if h < 1 or w < 1:
            raise InvalidBufferStateError("width and height must be >= 1")
        if c not in (1, 3):
            raise InvalidBufferStateError(f"channels must be 1 or 3, got {c}")
        if arr.dtype != np.float64:
            raise InvalidBufferStateError("data must be float64")

    @staticmethod
    def from_array(arr: np.ndarray) -> "ImageBuffer":
        """Build a buffer from a 2-D (grayscale) or 3-D array, copying."""
        a = np.asarray(arr, dtype=np.float64)
        if a.ndim == 2:
            a = a[:, :, np.newaxis]
        out = ImageBuffer(np.ascontiguousarray(a.copy()))
        out.data.setflags(write=False)
        return out

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def at(self, x: int, y: int, c: int) -> float:
        """Value accessor; out-of-bounds access raises IndexError."""
        if not (0 <= x < self.width and 0 <= y < self.height and 0 <= c < self.channels):
            raise IndexError(f"({x}, {y}, {c}) outside {self.width}x{self.height}x{self.channels}")
        return float(self.data[y, x, c])

    def plane(self, c: int) -> np.ndarray:
        """Read-only view of one channel plane, shape (h, w)."""
        return self.data[:, :, c]

    def require_finite(self) -> None:
        if not np.all(np.isfinite(self.data)):
            raise InvalidBufferStateError("buffer contains NaN or Inf")


def clamp01(buf: ImageBuffer) -> ImageBuffer:
    """Clamp every value into [0, 1]. Idempotent."""
    buf.require_finite()
    return ImageBuffer.from_array(np.clip(buf.data, 0.0, 1.0))


def _parse_ppm(raw: bytes, path: str) -> ImageBuffer:
    # Tokenizer handling '#' comments in the header.
    def tokens():
        i = 0
        while i < len(raw):
            ch = raw[i:i + 1]
            if ch in b" \t\r\n":
                i += 1
                continue
            if ch == b"#":
                while i < len(raw) and raw[i:i + 1] != b"\n":
                    i += 1
                continue
            j = i
            while j < len(raw) and raw[j:j + 1] not in b" \t\r\n":
                j += 1
            yield raw[i:j], j
            i = j

    gen = tokens()
    try:
        magic, _ = next(gen)
        if magic not in (b"P3", b"P6"):
            raise UnsupportedFormatError(f"{path}: unsupported PPM magic {magic!r}")
        w, _ = next(gen)
        h, _ = next(gen)
        maxval, end = next(gen)
        w, h, maxval = int(w), int(h), int(maxval)
    except (StopIteration, ValueError) as exc:
        raise CorruptDataError(f"{path}: malformed PPM header") from exc
    if w < 1 or h < 1 or maxval < 1 or maxval > 65535:
        raise CorruptDataError(f"{path}: bad PPM dimensions/maxval")

    n = w * h * 3
    if magic == b"P3":
        try:
            vals = np.array([int(t) for t, _ in gen], dtype=np.int64)
        except ValueError as exc:
            raise CorruptDataError(f"{path}: non-numeric P3 sample") from exc
        if vals.size != n:
            raise CorruptDataError(f"{path}: expected {n} samples, got {vals.size}")
    else:
        body = raw[end + 1:]  # single whitespace byte after maxval
        if maxval > 255:
            if len(body) < 2 * n:
                raise CorruptDataError(f"{path}: truncated P6 body")
            vals = np.frombuffer(body[:2 * n], dtype=">u2").astype(np.int64)
        else:
            if len(body) < n:
                raise CorruptDataError(f"{path}: truncated P6 body")
            vals = np.frombuffer(body[:n], dtype=np.uint8).astype(np.int64)
    if vals.min() < 0 or vals.max() > maxval:
        raise CorruptDataError(f"{path}: sample outside [0, {maxval}]")
    arr = vals.reshape(h, w, 3).astype(np.float64) / float(maxval)
    return ImageBuffer.from_array(arr)


def load_image(path: str) -> ImageBuffer:
    """Load a PNG or PPM (P3/P6) file into a [0, 1] float buffer.

    8-bit samples map to v/255, 16-bit to v/65535. Alpha channels are
    rejected rather than dropped.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    ext = os.path.splitext(path)[1].lower()
    if ext == ".ppm":
        with open(path, "rb") as fh:
            return _parse_ppm(fh.read(), path)
    if ext != ".png":
        raise UnsupportedFormatError(f"{path}: only .png and .ppm are supported")
    arr = cv2.imread(path, cv2.IMREAD_UNCHANGED)
    if arr is None:
        raise CorruptDataError(f"{path}: could not decode PNG")
    if arr.ndim == 3 and arr.shape[2] == 4:
        raise UnsupportedFormatError(f"{path}: alpha channel not supported")
    if arr.ndim == 3 and arr.shape[2] not in (1, 3):
        raise UnsupportedFormatError(f"{path}: {arr.shape[2]} channels not supported")
    if arr.dtype == np.uint8:
        scale = 255.0
    elif arr.dtype == np.uint16:
        scale = 65535.0
    else:
        raise UnsupportedFormatError(f"{path}: unsupported sample type {arr.dtype}")
    if arr.ndim == 3 and arr.shape[2] == 3:
        arr = arr[:, :, ::-1]  # BGR -> RGB
    return ImageBuffer.from_array(arr.astype(np.float64) / scale)


def save_image(buf: ImageBuffer, path: str, bit_depth: int = 8) -> None:
    """Quantize by round(v * (2^bit_depth - 1)) and write PNG or PPM."""
    if bit_depth not in (8, 16):
        raise ValueError(f"bit_depth must be 8 or 16, got {bit_depth}")
    buf.require_finite()
    maxval = (1 << bit_depth) - 1
    q = np.rint(np.clip(buf.data, 0.0, 1.0) * maxval).astype(np.int64)
    ext = os.path.splitext(path)[1].lower()
    if ext == ".ppm":
        if buf.channels != 3:
            raise UnsupportedFormatError("PPM output requires 3 channels")
        header = f"P6\n{buf.width} {buf.height}\n{maxval}\n".encode("ascii")
        body = q.astype(">u2" if bit_depth == 16 else np.uint8).tobytes()
        try:
            with open(path, "wb") as fh:
                fh.write(header + body)
        except OSError as exc:
            raise IOError(f"{path}: {exc}") from exc
        return
    if ext != ".png":
        raise UnsupportedFormatError(f"{path}: only .png and .ppm output supported")
    out = q.astype(np.uint16 if bit_depth == 16 else np.uint8)
    if buf.channels == 3:
        out = out[:, :, ::-1]  # RGB -> BGR for the encoder
    else:
        out = out[:, :, 0]
    if not cv2.imwrite(path, out):
        raise IOError(f"{path}: PNG encode failed")
