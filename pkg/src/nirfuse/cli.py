"""Command-line front end: fuse, synth, structures, eval.

Exit codes: 0 success, 1 processing error, 2 usage error (bad flags,
unknown config keys, missing input paths). A ``--config FILE`` of
``key=value`` lines (``#`` comments) can supply defaults for the numeric
options; explicit command-line flags win over the file.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench, pngio
from .dip import compute_dip, weight_nir
from .fusion import FusionConfig, fuse, fuse_without_dip
from .isp import develop, read_raw
from .noisesim import NoiseParams, darken, add_noise
from .structure import extract_structures

log = logging.getLogger("nirfuse")

USAGE_EXIT = 2
ERROR_EXIT = 1

# Config-file keys each subcommand accepts (flags always take precedence).
_CONFIG_KEYS = {
    "fuse": {"sigma", "lambda", "inject_gain", "guidance_combine", "restore_strength"},
    "synth": {"sigma", "seed", "target_mean", "chi"},
    "structures": {"restore_strength"},
    "eval": {"format", "sigmas", "seed", "patch_size", "lambda", "inject_gain", "guidance_combine"},
}


class UsageError(Exception):
    pass


def _load_config(path: str | None, command: str) -> dict[str, str]:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise UsageError(f"config file not found: {p}")
    allowed = _CONFIG_KEYS[command]
    values: dict[str, str] = {}
    for lineno, line in enumerate(p.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{p}:{lineno}: expected key=value")
        key, value = key.strip(), value.strip()
        if key not in allowed:
            raise UsageError(f"{p}:{lineno}: unknown config key {key!r} for {command!r}")
        values[key] = value
    return values


def _effective(args_value, config: dict[str, str], key: str, default, cast):
    if args_value is not None:
        return args_value
    if key in config:
        return cast(config[key])
    return default


def _require_inputs(*paths: str) -> None:
    for p in paths:
        if not Path(p).exists():
            raise UsageError(f"input path does not exist: {p}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nirfuse",
        description="Deterministic RGB-NIR low-light fusion toolkit",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="increase log verbosity")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fuse = sub.add_parser("fuse", help="fuse a noisy RGB image with its NIR companion")
    p_fuse.add_argument("--rgb", required=True, help="noisy sRGB input (PNG)")
    p_fuse.add_argument("--nir", required=True, help="aligned NIR input (grayscale PNG)")
    p_fuse.add_argument("--out", required=True, help="fused sRGB output (PNG)")
    p_fuse.add_argument("--sigma", type=float, default=None, help="assumed noise level in 10-bit DN (default 4)")
    p_fuse.add_argument("--lambda", dest="lam", type=float, default=None, help="inconsistency weight in (0,1), default 0.5")
    p_fuse.add_argument("--no-dip", action="store_true", help="disable inconsistency suppression (ablation)")
    p_fuse.add_argument("--config", default=None, help="key=value defaults file")

    p_synth = sub.add_parser("synth", help="synthesize a noisy low-light pair from a clean raw")
    p_synth.add_argument("--raw", required=True, help="clean Bayer raw (P5 PGM + .meta sidecar)")
    p_synth.add_argument("--sigma", type=float, default=None, help="noise level in 10-bit DN (default 4)")
    p_synth.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
    p_synth.add_argument("--out-noisy", required=True, help="developed noisy sRGB output (PNG)")
    p_synth.add_argument("--out-ref", required=True, help="developed noise-free reference output (PNG)")
    p_synth.add_argument("--config", default=None, help="key=value defaults file")

    p_struct = sub.add_parser("structures", help="dump per-scale structure maps (and DIP maps for a pair)")
    p_struct.add_argument("--input", required=True, help="image to analyze (PNG)")
    p_struct.add_argument("--nir", default=None, help="optional NIR companion; adds DIP and weighted maps")
    p_struct.add_argument("--out-dir", required=True, help="output directory for map PNGs")
    p_struct.add_argument("--restore-strength", type=float, default=None, help="guided-filter strength before extraction")
    p_struct.add_argument("--config", default=None, help="key=value defaults file")

    p_eval = sub.add_parser("eval", help="run the benchmark harness over a manifest")
    p_eval.add_argument("--manifest", required=True, help="TSV manifest: id<TAB>rgb_raw<TAB>nir")
    p_eval.add_argument("--out", required=True, help="report output path")
    p_eval.add_argument("--format", choices=("csv", "json", "markdown"), default=None, help="report format (default csv)")
    p_eval.add_argument("--sigmas", default=None, help="comma-separated noise levels (default 2,4,6,8)")
    p_eval.add_argument("--config", default=None, help="key=value defaults file")

    return parser


def _cmd_fuse(args) -> int:
    config = _load_config(args.config, "fuse")
    _require_inputs(args.rgb, args.nir)
    sigma = _effective(args.sigma, config, "sigma", 4.0, float)
    lam = _effective(args.lam, config, "lambda", 0.5, float)
    strength = _effective(None, config, "restore_strength", sigma / 255.0, float)
    cfg = FusionConfig(
        lam=lam,
        restore_strength=strength,
        inject_gain=_effective(None, config, "inject_gain", 1.0, float),
        guidance_combine=_effective(None, config, "guidance_combine", "min", str),
    )
    rgb = pngio.read_image(args.rgb)
    nir = pngio.read_image(args.nir)
    fused = fuse_without_dip(rgb, nir, cfg) if args.no_dip else fuse(rgb, nir, cfg)
    pngio.write_image(args.out, fused)
    log.info("wrote %s (%dx%d)", args.out, fused.height, fused.width)
    return 0


def _cmd_synth(args) -> int:
    config = _load_config(args.config, "synth")
    _require_inputs(args.raw)
    params = NoiseParams(
        sigma=_effective(args.sigma, config, "sigma", 4.0, float),
        target_mean=_effective(None, config, "target_mean", 5.0, float),
        chi=_effective(None, config, "chi", 1.0, float),
        seed=_effective(args.seed, config, "seed", 0, int),
    )
    raw = read_raw(args.raw)
    dark = darken(raw, params.target_mean)
    pngio.write_image(args.out_noisy, develop(add_noise(dark, params)))
    pngio.write_image(args.out_ref, develop(dark))
    log.info("wrote %s and %s", args.out_noisy, args.out_ref)
    return 0


def _dip_codes(plane: np.ndarray, lam: float) -> np.ndarray:
    codes = np.zeros(plane.shape, dtype=np.uint8)
    codes[plane == lam] = 128
    codes[plane == 1.0] = 255
    return codes


def _cmd_structures(args) -> int:
    config = _load_config(args.config, "structures")
    inputs = [args.input] + ([args.nir] if args.nir else [])
    _require_inputs(*inputs)
    strength = _effective(args.restore_strength, config, "restore_strength", 0.0, float)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    img = pngio.read_image(args.input)
    s_img = extract_structures(img, pre_restore=strength > 0, strength=strength)
    for i in range(s_img.scales):
        for c in range(s_img.channels):
            codes = (s_img.maps[i][c] * 255).astype(np.uint8)
            pngio.write_map(out_dir / f"struct_s{i + 1}_c{c + 1}.png", codes)

    if args.nir:
        nir = pngio.read_image(args.nir)
        s_nir = extract_structures(nir)
        for i in range(s_nir.scales):
            pngio.write_map(out_dir / f"nirstruct_s{i + 1}_c1.png", (s_nir.maps[i][0] * 255).astype(np.uint8))
        dip = compute_dip(s_img, s_nir)
        weighted = weight_nir(s_nir, dip)
        for i in range(dip.scales):
            for c in range(dip.channels):
                pngio.write_map(out_dir / f"dip_s{i + 1}_c{c + 1}.png", _dip_codes(dip.maps[i][c], dip.lam))
                pngio.write_map(out_dir / f"wnir_s{i + 1}_c{c + 1}.png", _dip_codes(weighted.maps[i][c], weighted.lam))
    log.info("wrote structure maps to %s", out_dir)
    return 0


def _cmd_eval(args) -> int:
    config = _load_config(args.config, "eval")
    _require_inputs(args.manifest)
    fmt = _effective(args.format, config, "format", "csv", str)
    if fmt not in ("csv", "json", "markdown"):
        raise UsageError(f"unknown report format {fmt!r}")
    sigmas_text = _effective(args.sigmas, config, "sigmas", "2,4,6,8", str)
    try:
        sigmas = tuple(float(s) for s in sigmas_text.split(",") if s.strip())
    except ValueError as exc:
        raise UsageError(f"bad --sigmas value {sigmas_text!r}: {exc}") from None
    if not sigmas:
        raise UsageError("--sigmas must list at least one value")
    manifest = bench.load_manifest(
        args.manifest,
        patch_size=_effective(None, config, "patch_size", bench.DEFAULT_PATCH_SIZE, int),
        seed=_effective(None, config, "seed", 0, int),
    )
    cfg = FusionConfig(
        lam=_effective(None, config, "lambda", 0.5, float),
        inject_gain=_effective(None, config, "inject_gain", 1.0, float),
        guidance_combine=_effective(None, config, "guidance_combine", "min", str),
    )
    report = bench.run_benchmark(manifest, sigmas=sigmas, cfg=cfg)
    bench.emit_report(report, args.out, fmt)
    log.info("wrote %s (%d rows, %d failures)", args.out, len(report.rows), len(report.failures))
    if report.failures:
        for entry_id, error in report.failures:
            print(f"nirfuse: entry {entry_id!r} failed: {error}", file=sys.stderr)
        return ERROR_EXIT
    return 0


_COMMANDS = {
    "fuse": _cmd_fuse,
    "synth": _cmd_synth,
    "structures": _cmd_structures,
    "eval": _cmd_eval,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles --help (0) and bad flags (2)
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"nirfuse: usage error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (ValueError, OSError) as exc:
        print(f"nirfuse: error: {exc}", file=sys.stderr)
        return ERROR_EXIT


if __name__ == "__main__":
    sys.exit(main())
