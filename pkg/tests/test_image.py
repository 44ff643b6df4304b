import numpy as np
import pytest

from uwenh import ImageBuffer, clamp01, load_image, save_image
from uwenh.errors import (
    CorruptDataError,
    InvalidBufferStateError,
    UnsupportedFormatError,
)

from conftest import random_buffer


def test_p3_all_255_maps_to_one(tmp_path):
    path = tmp_path / "white.ppm"
    path.write_bytes(b"P3\n2 2\n255\n" + b"255 " * 12)
    buf = load_image(str(path))
    assert buf.width == 2 and buf.height == 2 and buf.channels == 3
    assert np.all(buf.data == 1.0)


def test_p6_midgray_linear_scaling(tmp_path):
    path = tmp_path / "gray.ppm"
    path.write_bytes(b"P6\n1 1\n255\n" + bytes([128, 128, 128]))
    buf = load_image(str(path))
    assert np.allclose(buf.data, 128 / 255)


def test_p3_with_comments(tmp_path):
    path = tmp_path / "c.ppm"
    path.write_bytes(b"P3\n# a comment\n1 1\n# another\n255\n10 20 30\n")
    buf = load_image(str(path))
    assert np.allclose(buf.data[0, 0], [10 / 255, 20 / 255, 30 / 255])


def test_png_with_alpha_rejected(tmp_path):
    import cv2

    path = tmp_path / "alpha.png"
    cv2.imwrite(str(path), np.zeros((4, 4, 4), dtype=np.uint8))
    with pytest.raises(UnsupportedFormatError):
        load_image(str(path))


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_image("/nonexistent/image.png")


def test_corrupt_png(tmp_path):
    path = tmp_path / "bad.png"
    path.write_bytes(b"\x89PNG\r\n\x1a\nnot really a png")
    with pytest.raises(CorruptDataError):
        load_image(str(path))


def test_truncated_p6(tmp_path):
    path = tmp_path / "trunc.ppm"
    path.write_bytes(b"P6\n4 4\n255\nshort")
    with pytest.raises(CorruptDataError):
        load_image(str(path))


def test_unknown_extension(tmp_path):
    path = tmp_path / "x.jpg"
    path.write_bytes(b"anything")
    with pytest.raises(UnsupportedFormatError):
        load_image(str(path))


def test_save_all_ones_depth8(tmp_path):
    buf = ImageBuffer.from_array(np.ones((2, 3, 3)))
    path = tmp_path / "ones.ppm"
    save_image(buf, str(path), bit_depth=8)
    body = path.read_bytes().split(b"\n", 3)[3]
    assert body == b"\xff" * 18


@pytest.mark.parametrize("ext", ["png", "ppm"])
@pytest.mark.parametrize("depth", [8, 16])
def test_roundtrip_error_bound(tmp_path, rng, ext, depth):
    buf = random_buffer(rng, 9, 7)
    path = tmp_path / f"rt.{ext}"
    save_image(buf, str(path), bit_depth=depth)
    back = load_image(str(path))
    assert back.data.shape == buf.data.shape
    bound = 1.0 / (2 * ((1 << depth) - 1))
    assert np.abs(back.data - buf.data).max() <= bound + 1e-12


def test_grayscale_png_roundtrip(tmp_path, rng):
    buf = random_buffer(rng, 5, 5, channels=1)
    path = tmp_path / "g.png"
    save_image(buf, str(path), bit_depth=16)
    back = load_image(str(path))
    assert back.channels == 1
    assert np.abs(back.data - buf.data).max() <= 1.0 / (2 * 65535) + 1e-12


def test_save_nan_rejected(tmp_path):
    arr = np.full((2, 2, 1), 0.5)
    arr[0, 0, 0] = np.nan
    buf = ImageBuffer.from_array(arr)
    with pytest.raises(InvalidBufferStateError):
        save_image(buf, str(tmp_path / "nan.png"))


def test_clamp01_cases():
    buf = ImageBuffer.from_array(np.array([[[1.2], [-0.3], [0.5]]]))
    out = clamp01(buf)
    assert out.data.ravel().tolist() == [1.0, 0.0, 0.5]


def test_clamp01_idempotent(rng):
    buf = ImageBuffer.from_array(rng.uniform(-1.0, 2.0, size=(6, 6, 3)))
    once = clamp01(buf)
    twice = clamp01(once)
    assert np.array_equal(once.data, twice.data)


def test_clamp01_nan_rejected():
    buf = ImageBuffer.from_array(np.array([[[np.nan]]]))
    with pytest.raises(InvalidBufferStateError):
        clamp01(buf)


def test_accessor_and_bounds():
    arr = np.arange(12, dtype=np.float64).reshape(2, 2, 3) / 12
    buf = ImageBuffer.from_array(arr)
    assert buf.at(1, 0, 2) == arr[0, 1, 2]
    with pytest.raises(IndexError):
        buf.at(2, 0, 0)
    with pytest.raises(IndexError):
        buf.at(0, 0, 3)


def test_bad_shapes_rejected():
    with pytest.raises(InvalidBufferStateError):
        ImageBuffer.from_array(np.zeros((4, 4, 2)))
    with pytest.raises(InvalidBufferStateError):
        ImageBuffer.from_array(np.zeros((0, 4, 3)))
