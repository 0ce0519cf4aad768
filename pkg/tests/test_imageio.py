import numpy as np
import pytest

from nlpr_irls import imageio


@pytest.mark.parametrize("ext", [".pgm", ".png"])
def test_round_trip(tmp_path, ext):
    img = np.arange(256, dtype=np.float64).reshape(16, 16)
    path = tmp_path / f"x{ext}"
    imageio.write_image(path, img)
    back = imageio.read_image(path)
    assert back.dtype == np.float64 and np.array_equal(back, img)


def test_pgm_is_binary_p5(tmp_path):
    path = tmp_path / "a.pgm"
    imageio.write_image(path, np.zeros((2, 3)))
    assert path.read_bytes().startswith(b"P5")


def test_rounding_and_clamping():
    assert np.array_equal(imageio.to_uint8([[-5.0, 0.4, 0.6, 254.5, 300.0]]), [[0, 0, 1, 254, 255]])


def test_unsupported_extension(tmp_path):
    with pytest.raises(ValueError):
        imageio.image_format("x.jpg")
    with pytest.raises(ValueError):
        imageio.write_image(tmp_path / "x.tif", np.zeros((2, 2)))
