"""Darkening and Poisson-Gaussian synthesis: exact means, variance law, determinism."""

import hashlib

import numpy as np
import pytest

from nirfuse.imagecore import PlanarImage
from nirfuse.isp import RAW_MAXVAL, RawImage
from nirfuse.metrics import psnr
from nirfuse.noisesim import NoiseParams, add_noise, darken, derive_seed, synth_lowlight_pair

from conftest import make_raw

# SHA-256 of the add_noise output bytes for the fixture below, locked once.
GOLDEN_NOISY_SHA256 = "6e54842ff8749c1c1b4e71466e2a673c76ca12ef2486827bcec269dd9cbcf80c"


def ramp_raw(h=16, w=16):
    dn = (np.arange(h * w, dtype=np.float64).reshape(h, w) % 600) + 100
    return make_raw(dn / RAW_MAXVAL)


class TestNoiseParams:
    def test_rejects_nonpositive_sigma(self):
        with pytest.raises(ValueError, match="sigma"):
            NoiseParams(sigma=0.0)

    def test_rejects_bad_target_mean(self):
        with pytest.raises(ValueError, match="target_mean"):
            NoiseParams(sigma=2.0, target_mean=2000.0)

    def test_rejects_bad_chi(self):
        with pytest.raises(ValueError, match="chi"):
            NoiseParams(sigma=2.0, chi=-1.0)


class TestDarken:
    def test_scale_factor_from_mean(self):
        raw = make_raw(np.full((8, 8), 512.0 / RAW_MAXVAL))
        out = darken(raw, 5.0)
        # multiply by 5/512: every sample lands at 5 DN
        assert np.allclose(out.data * RAW_MAXVAL, 5.0, atol=1e-12)
        assert abs(out.data.mean() - 5.0 / RAW_MAXVAL) <= 1e-9

    def test_target_mean_hit_exactly(self, rng):
        raw = make_raw(rng.random((10, 12)) * 0.7 + 0.1)
        out = darken(raw, 5.0)
        assert abs(out.data.mean() - 5.0 / RAW_MAXVAL) <= 1e-9

    def test_fixed_point_when_already_at_target(self):
        raw = make_raw(np.full((6, 6), 5.0 / RAW_MAXVAL))
        out = darken(raw, 5.0)
        # scale is 1.0 up to the rounding of the sample mean (1 ulp)
        assert np.abs(out.data - raw.data).max() <= 1e-15

    def test_zero_raw_raises(self):
        with pytest.raises(ValueError, match="zero mean"):
            darken(make_raw(np.zeros((6, 6))), 5.0)


class TestAddNoise:
    def test_unbiased_in_small_sigma_limit(self):
        x = np.full((100, 100), 300.0 / RAW_MAXVAL)
        params = NoiseParams(sigma=1e-6, seed=7)
        y = add_noise(RawImage(x), params).data * RAW_MAXVAL
        se = y.std() / np.sqrt(y.size)
        assert abs(y.mean() - 300.0) <= 3.0 * max(se, 1e-12)

    def test_variance_law_at_100dn(self):
        # Var[y] = x*sigma/chi + sigma = 100*4 + 4 = 404 DN^2
        x = np.full((316, 318), 100.0 / RAW_MAXVAL)
        params = NoiseParams(sigma=4.0, seed=99)
        y = add_noise(RawImage(x), params).data * RAW_MAXVAL
        assert y.size >= 10**5
        assert abs(y.var() - 404.0) / 404.0 < 0.05
        se = y.std() / np.sqrt(y.size)
        assert abs(y.mean() - 100.0) <= 3.0 * se

    def test_chi_scales_poisson_variance(self):
        x = np.full((316, 318), 100.0 / RAW_MAXVAL)
        params = NoiseParams(sigma=4.0, chi=2.0, seed=5)
        y = add_noise(RawImage(x), params).data * RAW_MAXVAL
        expected = 100.0 * 4.0 / 2.0 + 4.0
        assert abs(y.var() - expected) / expected < 0.05

    def test_same_seed_bit_identical(self):
        raw = darken(ramp_raw())
        params = NoiseParams(sigma=4.0, seed=321)
        a = add_noise(raw, params)
        b = add_noise(raw, params)
        assert np.array_equal(a.data, b.data)

    def test_different_seed_differs(self):
        raw = darken(ramp_raw())
        a = add_noise(raw, NoiseParams(sigma=4.0, seed=1))
        b = add_noise(raw, NoiseParams(sigma=4.0, seed=2))
        assert not np.array_equal(a.data, b.data)

    def test_golden_fixture_locked(self):
        noisy = add_noise(darken(ramp_raw()), NoiseParams(sigma=4.0, seed=123456789))
        assert hashlib.sha256(noisy.data.tobytes()).hexdigest() == GOLDEN_NOISY_SHA256

    def test_output_in_range(self):
        noisy = add_noise(darken(ramp_raw()), NoiseParams(sigma=8.0, seed=11))
        assert noisy.data.min() >= 0.0 and noisy.data.max() <= 1.0


class TestSynthPair:
    def _pair(self, rng, size=32):
        scene = rng.random((size, size)) * 0.6 + 0.2
        nir = PlanarImage(rng.random((size, size, 1)))
        return make_raw(scene), nir

    def test_psnr_degrades_with_sigma(self, rng):
        raw, nir = self._pair(rng)
        psnrs = {}
        for sigma in (2.0, 4.0):
            noisy, _, ref = synth_lowlight_pair(raw, nir, NoiseParams(sigma=sigma, seed=42))
            psnrs[sigma] = psnr(noisy, ref)
        assert psnrs[4.0] < psnrs[2.0]

    def test_zero_noise_limit(self, rng):
        raw, nir = self._pair(rng)
        noisy, _, ref = synth_lowlight_pair(raw, nir, NoiseParams(sigma=1e-6, seed=42))
        assert psnr(noisy, ref) > 55.0

    def test_nir_passes_through_unchanged(self, rng):
        raw, nir = self._pair(rng)
        _, nir_out, _ = synth_lowlight_pair(raw, nir, NoiseParams(sigma=4.0, seed=0))
        assert nir_out is nir

    def test_reference_is_noise_free_and_dark(self, rng):
        raw, nir = self._pair(rng)
        _, _, ref_a = synth_lowlight_pair(raw, nir, NoiseParams(sigma=4.0, seed=1))
        _, _, ref_b = synth_lowlight_pair(raw, nir, NoiseParams(sigma=8.0, seed=2))
        assert np.array_equal(ref_a.data, ref_b.data)

    def test_dimension_mismatch_raises(self, rng):
        raw, _ = self._pair(rng)
        nir = PlanarImage(np.zeros((16, 16, 1)))
        with pytest.raises(ValueError, match="misaligned"):
            synth_lowlight_pair(raw, nir, NoiseParams(sigma=4.0))


class TestDeriveSeed:
    def test_stable_across_calls(self):
        assert derive_seed(0, "pair1", 4.0) == derive_seed(0, "pair1", 4.0)

    def test_distinct_for_distinct_parts(self):
        seeds = {
            derive_seed(0, "pair1", 2.0),
            derive_seed(0, "pair1", 4.0),
            derive_seed(0, "pair2", 2.0),
            derive_seed(1, "pair1", 2.0),
        }
        assert len(seeds) == 4

    def test_fits_in_64_bits(self):
        assert 0 <= derive_seed("anything", 123) < 2**64
