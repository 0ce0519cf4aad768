"""8-bit grayscale PGM (P5) and PNG reading and writing."""

import os

import numpy as np
from PIL import Image

__all__ = ["read_image", "write_image", "to_uint8", "image_format"]

_FORMATS = {".pgm": "PPM", ".png": "PNG"}


def image_format(path) -> str:
    ext = os.path.splitext(str(path))[1].lower()
    try:
        return _FORMATS[ext]
    except KeyError:
        raise ValueError(f"unsupported image extension {ext!r}; use .pgm or .png") from None


def read_image(path) -> np.ndarray:
    """Load a grayscale image as float64 in [0, 255]."""
    image_format(path)
    with Image.open(path) as im:
        if im.mode != "L":
            im = im.convert("L")
        return np.asarray(im, dtype=np.float64)


def to_uint8(img) -> np.ndarray:
    return np.clip(np.rint(np.asarray(img, dtype=np.float64)), 0, 255).astype(np.uint8)


def write_image(path, img) -> None:
    """Write ``img`` as 8-bit grayscale after rounding and clamping to [0, 255].

    ``.pgm`` files are binary P5, ``.png`` files are 8-bit grayscale.
    """
    fmt = image_format(path)
    Image.fromarray(to_uint8(img)).save(path, format=fmt)
