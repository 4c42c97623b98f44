"""Shared brute-force oracles and deterministic fixtures.

The oracle helpers here are deliberately slow, loop-based implementations
kept independent of the library's vectorized code paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest

from nirfuse.dip import compute_dip, weight_nir
from nirfuse.fusion import FusionConfig
from nirfuse.imagecore import PlanarImage, to_luma
from nirfuse.isp import RawImage
from nirfuse.metrics import SSIM_C1, SSIM_C2, SSIM_SIGMA, SSIM_WINDOW
from nirfuse.structure import extract_structures, restore


def conv2_reflect(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Brute-force 2-D correlation with mirror-reflected borders."""
    kh, kw = kernel.shape
    rh, rw = kh // 2, kw // 2
    padded = np.pad(plane, ((rh, rh), (rw, rw)), mode="reflect")
    out = np.zeros_like(plane, dtype=np.float64)
    for i in range(plane.shape[0]):
        for j in range(plane.shape[1]):
            acc = 0.0
            for di in range(kh):
                for dj in range(kw):
                    acc += kernel[di, dj] * padded[i + di, j + dj]
            out[i, j] = acc
    return out


def mirror_index(i: int, n: int) -> int:
    """Reflect an out-of-range index about the edge samples (no duplication)."""
    while i < 0 or i >= n:
        if i < 0:
            i = -i
        if i >= n:
            i = 2 * (n - 1) - i
    return i


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_planar(rng, h, w, c=1) -> PlanarImage:
    return PlanarImage(rng.random((h, w, c)))


def random_binary(rng, h, w) -> np.ndarray:
    return (rng.random((h, w)) < 0.5).astype(np.float64)


def make_raw(data: np.ndarray, cfa: str = "RGGB") -> RawImage:
    return RawImage(np.asarray(data, dtype=np.float64), cfa=cfa)


def psnr_oracle(x: PlanarImage, ref: PlanarImage) -> float:
    """Per-pixel loop MSE, independent of the vectorized metric."""
    import math

    total, count = 0.0, 0
    for c in range(x.channels):
        for i in range(x.height):
            for j in range(x.width):
                d = x.data[i, j, c] - ref.data[i, j, c]
                total += d * d
                count += 1
    mse = total / count
    return math.inf if mse == 0 else 10.0 * math.log10(1.0 / mse)


def ssim_oracle(x: PlanarImage, ref: PlanarImage) -> float:
    """Direct per-window SSIM with explicit Gaussian weights."""
    a = to_luma(x).plane(0) if x.channels == 3 else x.plane(0)
    b = to_luma(ref).plane(0) if ref.channels == 3 else ref.plane(0)
    r = SSIM_WINDOW // 2
    offsets = np.arange(SSIM_WINDOW) - r
    g1 = np.exp(-(offsets**2) / (2.0 * SSIM_SIGMA**2))
    weights = np.outer(g1, g1)
    weights = weights / weights.sum()
    pa = np.pad(a, r, mode="reflect")
    pb = np.pad(b, r, mode="reflect")
    vals = []
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            wa = pa[i : i + SSIM_WINDOW, j : j + SSIM_WINDOW]
            wb = pb[i : i + SSIM_WINDOW, j : j + SSIM_WINDOW]
            mu_a = (weights * wa).sum()
            mu_b = (weights * wb).sum()
            var_a = (weights * wa * wa).sum() - mu_a**2
            var_b = (weights * wb * wb).sum() - mu_b**2
            cov = (weights * wa * wb).sum() - mu_a * mu_b
            num = (2 * mu_a * mu_b + SSIM_C1) * (2 * cov + SSIM_C2)
            den = (mu_a**2 + mu_b**2 + SSIM_C1) * (var_a + var_b + SSIM_C2)
            vals.append(num / den)
    return float(np.mean(vals))


@dataclass(frozen=True)
class NirEdgeFixture:
    """Synthetic-shadow pair: an NIR-only edge in an RGB-flat area.

    ``region`` is the shadow neighborhood the acceptance criterion measures
    on; ``halo`` bounds the influence zone of the NIR-only structures.
    """

    noisy_rgb: PlanarImage
    nir: PlanarImage
    cfg: FusionConfig
    region: np.ndarray
    halo: np.ndarray


def nir_edge_fixture() -> NirEdgeFixture:
    size = 128
    rng = np.random.Generator(np.random.Philox(key=424242))
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64)

    # strong color blocks on the left pull the gradient threshold well above
    # the noise floor, so the right half carries texture but no structure
    base = 0.45 + 0.10 * (xs / size)
    rgb = np.stack([base * 0.95, base, base * 1.05], axis=-1)
    blocks = [
        (10, 40, 8, 30, (0.85, 0.30, 0.25)),
        (50, 90, 14, 44, (0.20, 0.65, 0.35)),
        (96, 120, 6, 38, (0.25, 0.35, 0.80)),
        (16, 70, 40, 58, (0.75, 0.70, 0.20)),
    ]
    for y0, y1, x0, x1, color in blocks:
        for c in range(3):
            rgb[y0:y1, x0:x1, c] = color[c]
    noisy_rgb = PlanarImage(np.clip(rgb + rng.normal(0.0, 0.02, rgb.shape), 0.0, 1.0))

    # NIR: smooth gradient plus a shadow rectangle confined to the RGB-flat
    # right half; its edges exist only on the NIR side
    rect = (72, 92, 76, 120)
    nir_plane = 0.55 + 0.15 * (ys / size)
    nir_plane[rect[0] : rect[1], rect[2] : rect[3]] *= 0.55
    nir = PlanarImage(np.clip(nir_plane, 0.0, 1.0))

    cfg = FusionConfig(restore_strength=4.0 / 255.0)

    # self-check: inconsistency suppression must kill every guidance pixel,
    # at every detail scale and for every channel-combined map
    s_rgb = extract_structures(restore(noisy_rgb, cfg.restore_strength))
    s_nir = extract_structures(nir)
    weighted = weight_nir(s_nir, compute_dip(s_rgb, s_nir, cfg.lam))
    for i in range(weighted.scales - 1):
        combined = np.minimum.reduce([weighted.maps[i][c] for c in range(weighted.channels)])
        assert np.all(combined == 0.0), "fixture invalid: guidance not fully suppressed"
    assert all(s_nir.maps[i][0].sum() > 0 for i in range(2)), "fixture invalid: no NIR edge"

    region = np.zeros((size, size), dtype=bool)
    region[rect[0] - 6 : rect[1] + 6, rect[2] - 6 : rect[3] + 6] = True
    halo = np.zeros((size, size), dtype=bool)
    halo[rect[0] - 16 : rect[1] + 16, rect[2] - 16 :] = True
    return NirEdgeFixture(noisy_rgb, nir, cfg, region, halo)
