"""PNG reading/writing for pipeline inputs and outputs.

Accepts 8-bit RGB and 8/16-bit grayscale PNGs on input; writes 8-bit
output (16-bit grayscale for NIR frames where precision matters). All
writes are atomic: temp file in the target directory, then rename.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from .imagecore import PlanarImage


def read_image(path: str | os.PathLike) -> PlanarImage:
    """Load a PNG (or any PIL-readable file) as a [0, 1] PlanarImage."""
    with Image.open(path) as im:
        mode = im.mode
        if mode in ("L", "RGB"):
            arr = np.asarray(im, dtype=np.float64) / 255.0
        elif mode in ("I", "I;16", "I;16B"):
            arr = np.asarray(im, dtype=np.float64) / 65535.0
        elif mode == "RGBA":
            arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
        else:
            raise ValueError(f"{path}: unsupported image mode {mode!r}")
    return PlanarImage(arr)


def _atomic_save(path: Path, image: Image.Image) -> None:
    fd, tmp = tempfile.mkstemp(suffix=".png", dir=path.parent or Path("."))
    os.close(fd)
    try:
        image.save(tmp, format="PNG")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_image(path: str | os.PathLike, img: PlanarImage) -> None:
    """Write a [0, 1] image as 8-bit PNG (grayscale or RGB)."""
    path = Path(path)
    arr = np.rint(np.clip(img.data, 0.0, 1.0) * 255.0).astype(np.uint8)
    if img.channels == 1:
        _atomic_save(path, Image.fromarray(arr[:, :, 0], mode="L"))
    else:
        _atomic_save(path, Image.fromarray(arr, mode="RGB"))


def write_gray16(path: str | os.PathLike, plane: np.ndarray) -> None:
    """Write a [0, 1] single plane as 16-bit grayscale PNG."""
    path = Path(path)
    arr = np.rint(np.clip(np.asarray(plane, dtype=np.float64), 0.0, 1.0) * 65535.0)
    _atomic_save(path, Image.fromarray(arr.astype(np.uint16)))


def write_map(path: str | os.PathLike, codes: np.ndarray) -> None:
    """Write an already-quantized uint8 map (structure/inconsistency dumps)."""
    path = Path(path)
    _atomic_save(path, Image.fromarray(np.asarray(codes, dtype=np.uint8), mode="L"))
