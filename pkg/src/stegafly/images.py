"""Lossless RGB image loading and saving.

An image is a ``uint8`` numpy array of shape ``(H, W, 3)`` in row-major
order with channels R, G, B.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FormatError, ShapeError

LOSSLESS_FORMATS = {"PNG", "BMP"}
_HIGH_DEPTH_MODES = {"I", "I;16", "I;16B", "I;16L", "I;16N", "F"}


def check_image(img) -> np.ndarray:
    a = np.asarray(img)
    if a.ndim != 3 or a.shape[2] != 3:
        raise ShapeError(f"expected an (H, W, 3) image, got shape {a.shape}")
    if a.dtype != np.uint8:
        raise ShapeError(f"expected uint8 samples, got {a.dtype}")
    return a


def load_image(path) -> np.ndarray:
    """Read a PNG or BMP file as an 8-bit RGB array."""
    try:
        with Image.open(path) as im:
            if im.format not in LOSSLESS_FORMATS:
                raise FormatError(f"{path}: {im.format} is not a supported lossless format")
            if im.mode in _HIGH_DEPTH_MODES:
                raise FormatError(f"{path}: only 8-bit images are supported (mode {im.mode})")
            return np.array(im.convert("RGB"), dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise FormatError(f"{path}: not a readable image") from exc


def save_png(path, img) -> None:
    """Write ``img`` as PNG; the file appears atomically or not at all."""
    path = Path(path)
    if path.suffix.lower() != ".png":
        raise FormatError(f"{path}: stego output must be a lossless .png file")
    a = check_image(img)
    fd, tmp = tempfile.mkstemp(suffix=".png", dir=path.parent or ".")
    os.close(fd)
    try:
        Image.fromarray(a).save(tmp, format="PNG")
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
