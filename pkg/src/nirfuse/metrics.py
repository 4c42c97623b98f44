"""Image-quality metrics: PSNR, SSIM, Dice distance, Charbonnier, composite.

PSNR and the Charbonnier distance are computed jointly over all channels;
SSIM is computed on luma for color inputs with the standard 11x11 Gaussian
window (sigma 1.5) and constants (0.01, 0.03) on unit range. The Dice
distance (sum(p^2) + sum(g^2)) / (2 sum(pg)) measures binary structure
agreement and is minimized at 1 for identical non-empty maps; disjoint
maps fall back to a tiny guard denominator instead of dividing by zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .imagecore import PlanarImage, to_luma
from .structure import StructurePyramid

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2

DICE_GUARD = 1e-8
CHARBONNIER_EPS = 1e-3

# Composite-score coefficients for the two structure terms.
LAMBDA_STRU_RGB = 1.0 / 1000.0
LAMBDA_STRU_NIR = 1.0 / 3000.0


@dataclass(frozen=True)
class EvalRecord:
    """One evaluation row: fidelity metrics of an output against a reference."""

    psnr: float
    ssim: float
    dice_rgb: float
    dice_nir: float
    charbonnier: float
    composite: float | None = None


def _check_same_shape(x: PlanarImage, ref: PlanarImage) -> None:
    if x.data.shape != ref.data.shape:
        raise ValueError(f"shape mismatch: {x.data.shape} vs {ref.data.shape}")


def psnr(x: PlanarImage, ref: PlanarImage) -> float:
    """Peak signal-to-noise ratio in dB on unit range, all channels jointly.

    Identical images return +inf (serialized as "inf" in reports).
    """
    _check_same_shape(x, ref)
    mse = float(np.mean((x.data - ref.data) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(offsets**2) / (2.0 * sigma**2))
    g /= g.sum()
    return np.outer(g, g)


def _window_filter(plane: np.ndarray, window: np.ndarray) -> np.ndarray:
    r = window.shape[0] // 2
    padded = np.pad(plane, r, mode="reflect")
    h, w = plane.shape
    out = np.zeros((h, w))
    for di in range(window.shape[0]):
        for dj in range(window.shape[1]):
            out += window[di, dj] * padded[di : di + h, dj : dj + w]
    return out


def ssim(x: PlanarImage, ref: PlanarImage) -> float:
    """Mean local SSIM, Gaussian-weighted 11x11 windows, mirror borders."""
    _check_same_shape(x, ref)
    if min(x.height, x.width) < SSIM_WINDOW:
        raise ValueError(f"image {x.height}x{x.width} smaller than SSIM window {SSIM_WINDOW}")
    a = to_luma(x).plane(0) if x.channels == 3 else x.plane(0)
    b = to_luma(ref).plane(0) if ref.channels == 3 else ref.plane(0)
    window = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    mu_a = _window_filter(a, window)
    mu_b = _window_filter(b, window)
    var_a = _window_filter(a * a, window) - mu_a * mu_a
    var_b = _window_filter(b * b, window) - mu_b * mu_b
    cov = _window_filter(a * b, window) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cov + SSIM_C2)
    den = (mu_a**2 + mu_b**2 + SSIM_C1) * (var_a + var_b + SSIM_C2)
    return float(np.mean(num / den))


def dice_distance(p: np.ndarray, g: np.ndarray) -> float:
    """Dice distance (sum p^2 + sum g^2) / (2 sum pg) of two binary maps.

    Equals 1.0 exactly for identical non-empty maps and grows with
    disagreement; fully disjoint maps divide by the guard instead of zero.
    """
    p = np.asarray(p, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if p.shape != g.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {g.shape}")
    for name, m in (("p", p), ("g", g)):
        if not np.all((m == 0.0) | (m == 1.0)):
            raise ValueError(f"{name} must be strictly binary")
    overlap = float(np.sum(p * g))
    num = float(np.sum(p * p) + np.sum(g * g))
    den = 2.0 * overlap if overlap > 0.0 else DICE_GUARD
    return num / den


def structure_dice(pred: StructurePyramid, gt: StructurePyramid) -> float:
    """Dice distances summed over every scale and channel of two pyramids."""
    if pred.scales != gt.scales or pred.channels != gt.channels:
        raise ValueError(
            f"pyramid layouts differ: {pred.scales}x{pred.channels} vs {gt.scales}x{gt.channels}"
        )
    return sum(
        dice_distance(pred.maps[i][c], gt.maps[i][c])
        for i in range(pred.scales)
        for c in range(pred.channels)
    )


def charbonnier(x: PlanarImage, ref: PlanarImage, eps: float = CHARBONNIER_EPS) -> float:
    """Smooth L2 distance sqrt(sum((x - ref)^2) + eps^2) over all channels."""
    _check_same_shape(x, ref)
    diff = x.data - ref.data
    return float(math.sqrt(float(np.sum(diff * diff)) + eps * eps))


def composite_score(
    rec_fused: float,
    rec_coarse: float,
    rec_nir: float,
    stru_rgb: float,
    stru_nir: float,
) -> float:
    """Weighted diagnostic aggregate of reconstruction and structure terms.

    rec_fused + rec_coarse + rec_nir + stru_rgb/1000 + stru_nir/3000; the
    three rec terms are Charbonnier distances, the stru terms Dice sums.
    """
    terms = (rec_fused, rec_coarse, rec_nir, stru_rgb, stru_nir)
    for name, t in zip(("rec_fused", "rec_coarse", "rec_nir", "stru_rgb", "stru_nir"), terms):
        if t is None or not math.isfinite(t):
            raise ValueError(f"composite term {name} missing or non-finite: {t}")
    return rec_fused + rec_coarse + rec_nir + LAMBDA_STRU_RGB * stru_rgb + LAMBDA_STRU_NIR * stru_nir
