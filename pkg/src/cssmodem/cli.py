"""Command-line front end.

Subcommands
-----------
* ``ber-sweep``   BER/SER versus SNR or Eb/N0, CSV per point.
* ``throughput``  same sweep plus the effective-throughput column.
* ``energy``      same sweep plus energy-per-useful-bit columns.
* ``xcorr``       chirp cross-rate inner-product table.

Configuration precedence is defaults < ``--config`` JSON file < flags.
Defaults mirror the standard link setup: 250 kHz bandwidth, 863 MHz carrier,
3 km/h mobility, 10+2 preamble, 30 payload chirps, 16-sample CP when a
selective coherent run needs one. All commands are deterministic under a
fixed ``--seed``; output files are written atomically so partial results
never appear.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from .chirps import cross_rate_inner_product
from .framing import Scheme
from .modems import dcrk_rates
from .simkit import (
    SweepSpec,
    energy_per_useful_bit,
    run_sweep,
    throughput,
)

CSV_SCHEMA = "# cssmodem csv v1"

_SWEEP_KEYS = {
    "scheme": str,
    "sf": int,
    "ne": int,
    "channel": str,
    "axis": str,
    "points": str,
    "coherent": str,
    "estimator": str,
    "block_fading": bool,
    "cp": int,
    "frames_max": int,
    "min_errors": int,
    "seed": int,
    "payload_chirps": int,
    "preamble_up": int,
    "sfd_down": int,
    "es": float,
    "bandwidth_hz": float,
    "carrier_hz": float,
    "speed_kmh": float,
    "l_taps": int,
    "threads": int,
}

_DEFAULTS = {
    "scheme": "lora",
    "sf": 9,
    "ne": 2,
    "channel": "awgn",
    "axis": "snr",
    "coherent": "auto",
    "estimator": "auto",
    "block_fading": False,
    "cp": None,
    "frames_max": 200_000,
    "min_errors": 200,
    "seed": 0,
    "payload_chirps": 30,
    "preamble_up": 10,
    "sfd_down": 2,
    "es": 1.0,
    "bandwidth_hz": 250e3,
    "carrier_hz": 863e6,
    "speed_kmh": 3.0,
    "l_taps": None,
    "threads": os.cpu_count() or 1,
}


def parse_points(text: str) -> tuple[float, ...]:
    """Parse a dB grid: ``start:step:stop`` (inclusive) or ``a,b,c``."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:step:stop, got {text!r}")
        start, step, stop = (float(p) for p in parts)
        if step == 0 or (stop - start) * step < 0:
            raise ValueError(f"grid {text!r} never reaches its stop value")
        count = int(round((stop - start) / step)) + 1
        return tuple(start + step * i for i in range(count))
    return tuple(float(p) for p in text.split(","))


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config file must hold a JSON object")
    unknown = set(cfg) - set(_SWEEP_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def _merge(args: argparse.Namespace) -> dict:
    """defaults < config file < explicitly passed flags"""
    merged = dict(_DEFAULTS)
    merged.update(_load_config(args.config))
    for key in _SWEEP_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    if "points" not in merged or merged.get("points") in (None, ""):
        raise ValueError("no sweep points given (use --points or the config file)")
    return merged


def _spec_from(merged: dict) -> SweepSpec:
    return SweepSpec(
        scheme=Scheme(merged["scheme"]),
        sf=merged["sf"],
        ne=merged["ne"] if merged["scheme"] == "dcrk" else None,
        channel=merged["channel"],
        axis=merged["axis"],
        points_db=parse_points(merged["points"]),
        min_errors=merged["min_errors"],
        max_frames=merged["frames_max"],
        seed=merged["seed"],
        coherent=merged["coherent"],
        estimator=merged["estimator"],
        block_fading=merged["block_fading"],
        n_cp=merged["cp"],
        payload_chirps=merged["payload_chirps"],
        preamble_up=merged["preamble_up"],
        sfd_down=merged["sfd_down"],
        es=merged["es"],
        bandwidth_hz=merged["bandwidth_hz"],
        carrier_hz=merged["carrier_hz"],
        speed_kmh=merged["speed_kmh"],
        l_taps=merged["l_taps"],
        profile_dir=os.environ.get("CSSM_PROFILE_DIR"),
    )


def _write_atomic(path: str, lines: list[str]) -> None:
    out = Path(path)
    fd, tmp = tempfile.mkstemp(dir=out.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _config_echo(merged: dict) -> str:
    body = ",".join(f"{k}={merged[k]}" for k in sorted(merged) if k != "threads")
    return f"# config: {body}"


def _sweep_rows(spec: SweepSpec, merged: dict, extra: str) -> list[str]:
    result = run_sweep(spec, workers=merged["threads"])
    ne_txt = str(spec.ne) if spec.scheme == Scheme.DCRK else ""
    rows = []
    for p in result.points:
        base = (
            f"{spec.scheme.value},{spec.sf},{ne_txt},{spec.channel},{spec.axis},"
            f"{p.point_db:g},{p.frames},{p.symbols},{p.bits},"
            f"{p.symbol_errors},{p.bit_errors},{p.ser:.8g},{p.ber:.8g},{spec.seed}"
        )
        if extra == "throughput":
            rho = throughput(spec.bits_per_chirp, spec.bandwidth_hz, 1 << spec.sf, p.ber)
            base += f",{rho:.8g}"
        elif extra == "energy":
            if p.ber < 1:
                gamma = energy_per_useful_bit(spec.es, spec.bits_per_chirp, p.ber)
                base += f",{gamma:.8g},{gamma / spec.es:.8g}"
            else:
                base += ",inf,inf"
        rows.append(base)
    return rows


_BASE_COLS = (
    "scheme,sf,ne,channel,axis,point_db,frames,symbols,bits,"
    "sym_errs,bit_errs,ser,ber,seed"
)


def _cmd_sweep(args: argparse.Namespace, extra: str = "") -> int:
    merged = _merge(args)
    spec = _spec_from(merged)
    header = _BASE_COLS
    if extra == "throughput":
        header += ",throughput_bps"
    elif extra == "energy":
        header += ",energy_per_useful_bit,energy_over_es"
    rows = _sweep_rows(spec, merged, extra)
    _write_atomic(args.out, [CSV_SCHEMA, _config_echo(merged), header] + rows)
    return 0


def _cmd_xcorr(args: argparse.Namespace) -> int:
    n = 1 << args.sf
    rates = sorted(set(dcrk_rates(args.ne)) | {args.m1})
    rows = [f"{args.sf},{args.m1},{m2},{cross_rate_inner_product(n, args.m1, m2):.10g},"
            f"{cross_rate_inner_product(n, args.m1, m2) / n:.10g}" for m2 in rates]
    _write_atomic(
        args.out,
        [CSV_SCHEMA, f"# config: sf={args.sf},m1={args.m1},ne={args.ne}",
         "sf,m1,m2,inner_product_abs,normalized"] + rows,
    )
    return 0


def _add_sweep_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--scheme", choices=["lora", "iqcss", "dcrk"])
    sub.add_argument("--sf", type=int)
    sub.add_argument("--ne", type=int)
    sub.add_argument("--channel", choices=["awgn", "flat", "tu12"])
    sub.add_argument("--axis", choices=["snr", "ebn0"])
    sub.add_argument("--points", help="dB grid, start:step:stop or a,b,c")
    sub.add_argument("--coherent", choices=["auto", "on", "off"])
    sub.add_argument("--estimator", choices=["auto", "known", "ls"])
    sub.add_argument(
        "--block-fading", dest="block_fading", choices=["on", "off"],
        type=lambda s: s, default=None,
        help="freeze the fading realization per frame",
    )
    sub.add_argument("--cp", type=int, help="cyclic prefix samples per chirp")
    sub.add_argument("--frames-max", dest="frames_max", type=int)
    sub.add_argument("--min-errors", dest="min_errors", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--threads", type=int)
    sub.add_argument("--config", help="JSON config file")
    sub.add_argument("--out", required=True, help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cssmodem",
        description="Chirp spread spectrum link simulator",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    for name, hlp in [
        ("ber-sweep", "BER/SER versus SNR or Eb/N0"),
        ("throughput", "BER sweep plus effective throughput"),
        ("energy", "BER sweep plus energy per useful bit"),
    ]:
        sub = subs.add_parser(name, help=hlp)
        _add_sweep_flags(sub)

    xc = subs.add_parser("xcorr", help="cross-rate inner product table")
    xc.add_argument("--sf", type=int, required=True)
    xc.add_argument("--m1", type=int, required=True)
    xc.add_argument("--ne", type=int, default=3, help="rate alphabet size, 2^ne")
    xc.add_argument("--out", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "block_fading", None) is not None:
        args.block_fading = args.block_fading == "on"
    try:
        if args.command == "ber-sweep":
            return _cmd_sweep(args)
        if args.command == "throughput":
            return _cmd_sweep(args, extra="throughput")
        if args.command == "energy":
            return _cmd_sweep(args, extra="energy")
        if args.command == "xcorr":
            return _cmd_xcorr(args)
        parser.error(f"unknown command {args.command!r}")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
