"""Minimal raw-to-sRGB development pipeline.

Bayer raw frames (10-bit, normalized to [0, 1]) are developed with the
three classic stages: gray-world white balance, bilinear demosaic, gamma
encode. NIR frames never pass through here; they are single-channel and
only ever gamma-encoded.

Raw files on disk are 16-bit big-endian binary PGM ("P5", maxval 1023)
with a ``<stem>.meta`` sidecar carrying ``cfa=`` and ``bit_depth=`` lines.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .imagecore import PlanarImage

RAW_MAXVAL = 1023  # 10-bit DN ceiling

# 2x2 color layout per CFA phase, row-major.
CFA_LAYOUTS = {
    "RGGB": ("RG", "GB"),
    "BGGR": ("BG", "GR"),
    "GRBG": ("GR", "BG"),
    "GBRG": ("GB", "RG"),
}

# Interpolation stencils: cross for green, cross+diagonal for red/blue.
# Weights make every interior interpolation the plain mean of the 2 or 4
# available neighbors, and measured sites pass through untouched.
_KERNEL_G = np.array([[0.0, 0.25, 0.0], [0.25, 1.0, 0.25], [0.0, 0.25, 0.0]])
_KERNEL_RB = np.array([[0.25, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 0.25]])


@dataclass(frozen=True)
class RawImage:
    """Single-plane Bayer mosaic, values normalized to [0, 1] (DN/1023)."""

    data: np.ndarray
    cfa: str = "RGGB"
    bit_depth: int = 10

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"raw data must be a single 2-D plane, got shape {arr.shape}")
        if arr.shape[0] % 2 or arr.shape[1] % 2:
            raise ValueError(f"raw dimensions must be even, got {arr.shape[0]}x{arr.shape[1]}")
        if self.cfa not in CFA_LAYOUTS:
            raise ValueError(f"unknown CFA phase {self.cfa!r}")
        if self.bit_depth != 10:
            raise ValueError(f"only 10-bit raw supported, got bit_depth={self.bit_depth}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("raw contains non-finite samples")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("raw values must lie in [0, 1]")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def cfa_masks(raw: RawImage) -> dict[str, np.ndarray]:
    """Boolean site masks for 'R', 'G', 'B' under the raw's CFA phase."""
    layout = CFA_LAYOUTS[raw.cfa]
    h, w = raw.data.shape
    rows = np.arange(h)[:, None] % 2
    cols = np.arange(w)[None, :] % 2
    masks = {}
    for color in "RGB":
        m = np.zeros((h, w), dtype=bool)
        for i in range(2):
            for j in range(2):
                if layout[i][j] == color:
                    m |= (rows == i) & (cols == j)
        masks[color] = m
    return masks


def gray_world_wb(raw: RawImage) -> RawImage:
    """Gray-world white balance: scale R and B site means onto the G mean.

    Output is clamped to [0, 1]; gains can push bright sites past full scale.
    """
    masks = cfa_masks(raw)
    means = {c: float(raw.data[masks[c]].mean()) for c in "RGB"}
    for c in "RGB":
        if means[c] == 0.0:
            raise ValueError(f"degenerate raw: {c} plane has zero mean, cannot white-balance")
    gains = {"R": means["G"] / means["R"], "G": 1.0, "B": means["G"] / means["B"]}
    out = raw.data.copy()
    for c in "RGB":
        out[masks[c]] *= gains[c]
    return RawImage(np.clip(out, 0.0, 1.0), cfa=raw.cfa, bit_depth=raw.bit_depth)


def _conv3(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    padded = np.pad(plane, 1, mode="reflect")
    h, w = plane.shape
    out = np.zeros((h, w), dtype=np.float64)
    for di in range(3):
        for dj in range(3):
            k = kernel[di, dj]
            if k != 0.0:
                out += k * padded[di : di + h, dj : dj + w]
    return out


def demosaic_bilinear(raw: RawImage) -> PlanarImage:
    """Bilinear demosaic: missing samples are means of available neighbors.

    Green from its 4-connected cross, red/blue from 2 axis neighbors at
    green sites and 4 diagonal neighbors at the opposite-color site. Mirror
    borders; measured samples pass through exactly.
    """
    masks = cfa_masks(raw)
    planes = []
    for color, kernel in (("R", _KERNEL_RB), ("G", _KERNEL_G), ("B", _KERNEL_RB)):
        mask = masks[color]
        masked = np.where(mask, raw.data, 0.0)
        planes.append(_conv3(masked, kernel) / _conv3(mask.astype(np.float64), kernel))
    return PlanarImage(np.stack(planes, axis=-1))


def gamma_encode(img: PlanarImage, gamma: float = 2.2) -> PlanarImage:
    """Pure power-law encode v -> v**(1/gamma); expects values in [0, 1]."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return PlanarImage(np.power(img.data, 1.0 / gamma))


def develop(raw: RawImage, gamma: float = 2.2) -> PlanarImage:
    """Full development: white balance, demosaic, gamma encode."""
    return gamma_encode(demosaic_bilinear(gray_world_wb(raw)), gamma)


def _meta_path(path: Path) -> Path:
    return path.with_suffix(".meta")


def read_raw(path: str | os.PathLike) -> RawImage:
    """Read a 16-bit big-endian P5 PGM raw plus its ``<stem>.meta`` sidecar."""
    path = Path(path)
    with open(path, "rb") as fh:
        blob = fh.read()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if pos < len(blob) and blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        fields.append(blob[start:pos])
    pos += 1  # single whitespace after maxval, then binary samples
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {fields[0]!r})")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != RAW_MAXVAL:
        raise ValueError(f"{path}: expected maxval {RAW_MAXVAL}, got {maxval}")
    samples = np.frombuffer(blob, dtype=">u2", count=width * height, offset=pos)
    if samples.size != width * height:
        raise ValueError(f"{path}: truncated sample data")
    data = samples.reshape(height, width).astype(np.float64) / RAW_MAXVAL

    meta = _meta_path(path)
    if not meta.exists():
        raise FileNotFoundError(f"missing raw sidecar {meta}")
    cfa, bit_depth = None, None
    for line in meta.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "cfa":
            cfa = value
        elif key == "bit_depth":
            bit_depth = int(value)
        else:
            raise ValueError(f"{meta}: unknown key {key!r}")
    if cfa is None or bit_depth is None:
        raise ValueError(f"{meta}: needs both cfa= and bit_depth= lines")
    return RawImage(data, cfa=cfa, bit_depth=bit_depth)


def write_raw(path: str | os.PathLike, raw: RawImage) -> None:
    """Write a raw as 16-bit big-endian P5 PGM with its sidecar."""
    path = Path(path)
    dn = np.rint(raw.data * RAW_MAXVAL).astype(">u2")
    header = f"P5\n{raw.width} {raw.height}\n{RAW_MAXVAL}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(dn.tobytes())
    _meta_path(path).write_text(f"cfa={raw.cfa}\nbit_depth={raw.bit_depth}\n")
