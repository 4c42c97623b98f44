"""Low-light raw synthesis: brightness reduction plus Poisson-Gaussian noise.

The two-step protocol turns a clean normal-light raw into a pseudo-dark
noisy raw: first scale the frame so its mean lands at a target DN (default
5 on the 10-bit scale), then add shot noise with photon count x*chi/sigma
and read noise with variance sigma (both in DN units). A single ``sigma``
therefore controls both noise terms; larger sigma means fewer photons and
more read noise.

All randomness comes from a counter-based Philox stream keyed by the
params seed, so outputs are bit-reproducible and cannot depend on how the
surrounding code is scheduled.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .imagecore import PlanarImage
from .isp import RAW_MAXVAL, RawImage, develop

DEFAULT_TARGET_MEAN = 5.0  # darkened frame mean, in 10-bit DN


@dataclass(frozen=True)
class NoiseParams:
    """Noise level in 10-bit DN plus darkening target and RNG seed.

    ``chi`` is the dimensionless photon-scale constant: the Poisson branch
    draws counts with mean x*chi/sigma, giving signal-dependent variance
    x*sigma/chi in DN^2.
    """

    sigma: float
    target_mean: float = DEFAULT_TARGET_MEAN
    chi: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not 0 < self.target_mean <= RAW_MAXVAL:
            raise ValueError(f"target_mean must be in (0, {RAW_MAXVAL}], got {self.target_mean}")
        if not self.chi > 0:
            raise ValueError(f"chi must be > 0, got {self.chi}")


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from arbitrary labels (dataset seed, entry id, sigma).

    Hash-based so outputs do not depend on process hash randomization or
    entry ordering.
    """
    h = hashlib.sha256()
    for part in parts:
        h.update(repr(part).encode("utf-8"))
        h.update(b"\x00")
    return int.from_bytes(h.digest()[:8], "big")


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & (2**64 - 1)))


def darken(raw: RawImage, target_mean: float = DEFAULT_TARGET_MEAN) -> RawImage:
    """Scale the raw so its mean equals ``target_mean`` DN exactly."""
    mean = float(raw.data.mean())
    if mean == 0.0:
        raise ValueError("degenerate raw: zero mean, cannot darken")
    scale = target_mean / (RAW_MAXVAL * mean)
    return RawImage(raw.data * scale, cfa=raw.cfa, bit_depth=raw.bit_depth)


def add_noise(raw: RawImage, params: NoiseParams) -> RawImage:
    """Poisson-Gaussian noise in the raw domain, clamped back to [0, 1].

    In DN units: y = Poisson(x*chi/sigma) * sigma/chi + N(0, var=sigma),
    so E[y] = x and Var[y] = x*sigma/chi + sigma.
    """
    rng = _generator(params.seed)
    x = raw.data * RAW_MAXVAL
    photon_scale = params.sigma / params.chi
    shot = rng.poisson(x / photon_scale).astype(np.float64) * photon_scale
    read = rng.normal(0.0, np.sqrt(params.sigma), size=x.shape)
    noisy = np.clip((shot + read) / RAW_MAXVAL, 0.0, 1.0)
    return RawImage(noisy, cfa=raw.cfa, bit_depth=raw.bit_depth)


def synth_lowlight_pair(
    clean_rgb_raw: RawImage,
    clean_nir: PlanarImage,
    params: NoiseParams,
) -> tuple[PlanarImage, PlanarImage, PlanarImage]:
    """Build one benchmark triple: (noisy sRGB, NIR, noise-free reference).

    The reference is the darkened-then-developed clean raw, so it shares
    the noisy frame's brightness and PSNR against it measures noise removal
    rather than brightness restoration. The NIR frame is treated as already
    high-quality and passes through untouched.
    """
    if clean_nir.channels != 1:
        raise ValueError(f"NIR must be single-channel, got {clean_nir.channels}")
    if (clean_rgb_raw.height, clean_rgb_raw.width) != (clean_nir.height, clean_nir.width):
        raise ValueError(
            f"misaligned pair: raw {clean_rgb_raw.height}x{clean_rgb_raw.width} vs "
            f"NIR {clean_nir.height}x{clean_nir.width}"
        )
    dark = darken(clean_rgb_raw, params.target_mean)
    noisy_rgb = develop(add_noise(dark, params))
    reference_rgb = develop(dark)
    return noisy_rgb, clean_nir, reference_rgb
