"""Deterministic synthetic reference scenes for the benchmark and demos.

Real aligned RGB-NIR captures are not bundled; these builders generate
reproducible stand-ins: piecewise-smooth color scenes with matching NIR
frames, plus optional structure inconsistencies of the two kinds that
matter in practice: an NIR-only shadow band and an RGB-only color feature
that is metameric (invisible) in NIR.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .imagecore import PlanarImage, binomial_blur
from .isp import RawImage, write_raw
from .pngio import write_gray16

# NIR sensitivity mix; the RGB-only feature below is chosen orthogonal to it.
_NIR_MIX = np.array([0.35, 0.45, 0.20])


def _coords(size: int) -> tuple[np.ndarray, np.ndarray]:
    ys, xs = np.mgrid[0:size, 0:size]
    return ys.astype(np.float64), xs.astype(np.float64)


def make_scene_pair(
    size: int = 256,
    seed: int = 0,
    inconsistent: bool = False,
) -> tuple[RawImage, PlanarImage]:
    """Build one aligned (clean Bayer raw, clean NIR) reference pair.

    The linear RGB scene is a soft background gradient with rectangles and
    disks of distinct reflectances; NIR is a fixed channel mix of the same
    scene, so structures agree everywhere. With ``inconsistent`` two extra
    elements are added: a shadow band present only in NIR and a color patch
    whose channel deltas cancel in the NIR mix.
    """
    if size % 2:
        raise ValueError(f"scene size must be even, got {size}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    ys, xs = _coords(size)

    base = 0.25 + 0.30 * (xs / size) + 0.15 * (ys / size)
    rgb = np.stack([base * 0.9, base, base * 1.1], axis=-1)

    # Reflectance palette: distinct in every channel so edges show up in
    # all RGB planes and in the NIR mix.
    palette = [
        (0.78, 0.32, 0.25),
        (0.22, 0.62, 0.30),
        (0.30, 0.38, 0.80),
        (0.72, 0.68, 0.28),
        (0.18, 0.20, 0.24),
        (0.82, 0.80, 0.78),
        (0.55, 0.25, 0.60),
        (0.25, 0.55, 0.60),
    ]
    for k in range(14):
        color = palette[k % len(palette)]
        cy = float(rng.integers(size // 10, size - size // 10))
        cx = float(rng.integers(size // 10, size - size // 10))
        extent = float(rng.integers(size // 24, size // 7))
        kind = k % 3
        if kind == 0:
            mask = (np.abs(ys - cy) < extent) & (np.abs(xs - cx) < extent * 0.8)
        elif kind == 1:
            mask = (ys - cy) ** 2 + (xs - cx) ** 2 < extent**2
        else:
            mask = (np.abs(ys - cy) + np.abs(xs - cx)) < extent
        for c in range(3):
            rgb[:, :, c][mask] = color[c]

    # Striped texture patch: dense structure so detail injection has a
    # measurable footprint in the aggregate scores.
    sy, sx = int(size * 0.05), int(size * 0.05)
    sh, sw = size // 5, size // 4
    stripes = ((xs[:sh, :sw] // 6) % 2) > 0
    for c, (lo, hi) in enumerate([(0.3, 0.7), (0.35, 0.65), (0.25, 0.6)]):
        rgb[sy : sy + sh, sx : sx + sw, c] = np.where(stripes, hi, lo)

    nir_scene = rgb.copy()

    if inconsistent:
        # NIR-only shadow: a horizontal band darkened only on the NIR side.
        band_lo, band_hi = int(size * 0.62), int(size * 0.74)
        shadow = np.ones((size, size))
        shadow[band_lo:band_hi, :] = 0.55
        # RGB-only patch: channel deltas orthogonal to the NIR mix, so the
        # feature vanishes on the NIR side (metameric in IR).
        py, px = int(size * 0.15), int(size * 0.55)
        ph, pw = int(size * 0.18), int(size * 0.25)
        delta = np.array([0.20, -0.10, -0.125])
        assert abs(float(delta @ _NIR_MIX)) < 1e-12
        rgb[py : py + ph, px : px + pw, :] += delta
    else:
        shadow = np.ones((size, size))

    rgb = np.clip(binomial_blur(rgb), 0.02, 0.98)
    nir_scene = np.clip(binomial_blur(nir_scene), 0.02, 0.98)

    nir = nir_scene @ _NIR_MIX
    nir = np.clip((0.15 + 0.80 * nir) * shadow, 0.0, 1.0)

    return mosaic_rggb(rgb), PlanarImage(nir)


def mosaic_rggb(rgb: np.ndarray) -> RawImage:
    """Sample an (H, W, 3) linear RGB scene onto an RGGB Bayer mosaic."""
    rgb = np.asarray(rgb, dtype=np.float64)
    h, w = rgb.shape[:2]
    raw = np.empty((h, w), dtype=np.float64)
    raw[0::2, 0::2] = rgb[0::2, 0::2, 0]
    raw[0::2, 1::2] = rgb[0::2, 1::2, 1]
    raw[1::2, 0::2] = rgb[1::2, 0::2, 1]
    raw[1::2, 1::2] = rgb[1::2, 1::2, 2]
    return RawImage(raw, cfa="RGGB")


def write_demo_dataset(out_dir: str | Path, size: int = 256, n_pairs: int = 3) -> Path:
    """Write a small benchmark dataset plus manifest; returns the manifest path.

    Pair 0 is structure-consistent; later pairs carry the NIR-only shadow
    and the metameric RGB patch.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for k in range(n_pairs):
        raw, nir = make_scene_pair(size=size, seed=100 + k, inconsistent=(k > 0))
        raw_path = out_dir / f"pair{k}_rgb.pgm"
        nir_path = out_dir / f"pair{k}_nir.png"
        write_raw(raw_path, raw)
        write_gray16(nir_path, nir.plane(0))
        lines.append(f"pair{k}\t{raw_path.name}\t{nir_path.name}")
    manifest = out_dir / "manifest.tsv"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest
