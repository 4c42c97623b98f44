"""Deterministic RGB-NIR low-light fusion toolkit.

Pipeline stages: raw development (isp), low-light noise synthesis
(noisesim), multi-scale structure extraction (structure), inconsistency
scoring and NIR suppression (dip), structure-guided detail-injection
fusion (fusion), quality metrics (metrics), and a reproducible benchmark
harness (bench) with a CLI front end (cli).
"""

from .bench import DatasetManifest, EvalReport, crop_patches, emit_report, load_manifest, run_benchmark
from .dip import DipPyramid, compute_dip, inconsistency, weight_nir
from .fusion import FusionConfig, fuse, fuse_without_dip
from .imagecore import PlanarImage, Pyramid, gaussian_pyramid, laplacian_pyramid, reconstruct, to_luma
from .isp import RawImage, demosaic_bilinear, develop, gamma_encode, gray_world_wb, read_raw, write_raw
from .metrics import EvalRecord, charbonnier, composite_score, dice_distance, psnr, ssim, structure_dice
from .noisesim import NoiseParams, add_noise, darken, derive_seed, synth_lowlight_pair
from .structure import StructurePyramid, binarize_by_mean, extract_structures, restore, sobel_magnitude

__version__ = "0.1.0"

__all__ = [
    "DatasetManifest",
    "DipPyramid",
    "EvalRecord",
    "EvalReport",
    "FusionConfig",
    "NoiseParams",
    "PlanarImage",
    "Pyramid",
    "RawImage",
    "StructurePyramid",
    "add_noise",
    "binarize_by_mean",
    "charbonnier",
    "composite_score",
    "compute_dip",
    "crop_patches",
    "darken",
    "demosaic_bilinear",
    "derive_seed",
    "develop",
    "dice_distance",
    "emit_report",
    "extract_structures",
    "fuse",
    "fuse_without_dip",
    "gamma_encode",
    "gaussian_pyramid",
    "gray_world_wb",
    "inconsistency",
    "laplacian_pyramid",
    "load_manifest",
    "psnr",
    "read_raw",
    "reconstruct",
    "restore",
    "run_benchmark",
    "sobel_magnitude",
    "ssim",
    "structure_dice",
    "synth_lowlight_pair",
    "to_luma",
    "weight_nir",
    "write_raw",
]
