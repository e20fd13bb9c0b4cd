"""Command-line front end: parse configuration, run sweeps, emit CSV.

Configuration comes from an optional flat key=value file plus flags, with
flags taking precedence. Results land in a CSV (written to a temp file and
renamed, so a failed run never leaves a partial file) and a summary table on
standard output.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .core import InvalidConfig, derive_params
from .detector import ThresholdKind
from .sim import BerRecord, ChannelMode, sweep

CSV_HEADER = "snr_db,w,threshold_kind,channel_mode,trials,empirical_ber,stderr,analytic_ber"

DEFAULTS: dict[str, object] = {
    "cp_len": 256,
    "eff_len": 1024,
    "direct_order": 8,
    "tag_order": 8,
    "reflect_order": 8,
    "tag_gain": 0.5 + 0.0j,
    "noise_power": 1.0,
    "trials": 100_000,
    "seed": 1,
}
DEFAULT_SNR_DB = 20.0
DEFAULT_W = 8

_KIND_CHOICES = {"optimal": [ThresholdKind.OPTIMAL],
                 "equiprobable": [ThresholdKind.EQUIPROBABLE],
                 "both": [ThresholdKind.OPTIMAL, ThresholdKind.EQUIPROBABLE]}
_MODE_CHOICES = {"fixed": ChannelMode.FIXED_REALIZATION,
                 "redraw": ChannelMode.REDRAW_PER_TRIAL}


class ConfigError(ValueError):
    """Bad configuration; the message names the offending field."""


@dataclass
class RunConfig:
    cp_len: int = 256
    eff_len: int = 1024
    direct_order: int = 8
    tag_order: int = 8
    reflect_order: int = 8
    tag_gain: complex = 0.5 + 0.0j
    noise_power: float = 1.0
    trials: int = 100_000
    seed: int = 1
    snr_values: list[float] = field(default_factory=lambda: [DEFAULT_SNR_DB])
    w_values: list[int] = field(default_factory=lambda: [DEFAULT_W])
    kinds: list[ThresholdKind] = field(default_factory=lambda: [ThresholdKind.OPTIMAL])
    mode: ChannelMode = ChannelMode.FIXED_REALIZATION
    out_path: str = "ber.csv"


def _parse_snr_axis(text: str) -> list[float]:
    """'start:stop:step' (stop inclusive) or a single value."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"snr: expected START:STOP:STEP, got {text!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"snr: non-numeric component in {text!r}") from None
        if step <= 0 or stop < start:
            raise ConfigError(f"snr: need step > 0 and stop >= start in {text!r}")
        count = int(round((stop - start) / step)) + 1
        values = [start + i * step for i in range(count)]
        return [v for v in values if v <= stop + 1e-9]
    try:
        return [float(text)]
    except ValueError:
        raise ConfigError(f"snr: non-numeric value {text!r}") from None


def _parse_w_list(text: str) -> list[int]:
    try:
        values = [int(p) for p in text.split(",") if p.strip() != ""]
    except ValueError:
        raise ConfigError(f"w: non-integer value in {text!r}") from None
    if not values:
        raise ConfigError(f"w: empty list {text!r}")
    return values


def _read_config_file(path: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                stripped = line.split("#", 1)[0].strip()
                if not stripped:
                    continue
                if "=" not in stripped:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
                key, value = stripped.split("=", 1)
                entries[key.strip().lower().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from None
    return entries


def _build_argparser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="backscatter-sim",
        description="Monte Carlo BER sweeps for a CP-gated ambient backscatter link.")
    ap.add_argument("--config", metavar="PATH", help="flat key=value config file")
    ap.add_argument("--snr", metavar="START:STOP:STEP", help="SNR axis in dB, stop inclusive; or one value")
    ap.add_argument("--w", metavar="LIST", help="comma list of averaging-window sizes")
    ap.add_argument("--threshold", choices=sorted(_KIND_CHOICES), help="threshold kind(s)")
    ap.add_argument("--channel-mode", choices=sorted(_MODE_CHOICES), help="fixed realization or redraw per trial")
    ap.add_argument("--trials", type=int, metavar="N", help="Monte Carlo trials per point")
    ap.add_argument("--seed", type=int, metavar="N", help="RNG seed (fallback: BACKSCATTER_SEED)")
    ap.add_argument("--out", metavar="PATH", help="output CSV path")
    return ap


def parse_config(argv: list[str] | None = None) -> RunConfig:
    """Resolve defaults, config file, environment and flags into a RunConfig.

    Precedence, lowest to highest: built-in defaults, BACKSCATTER_SEED (seed
    only), config file, flags. The resulting parameter set is validated for
    every requested (window, SNR) combination before anything runs.
    """
    args = _build_argparser().parse_args(argv)
    cfg = RunConfig()

    env_seed = os.environ.get("BACKSCATTER_SEED")
    if env_seed is not None:
        try:
            cfg.seed = int(env_seed)
        except ValueError:
            raise ConfigError(f"seed: BACKSCATTER_SEED must be an integer, got {env_seed!r}") from None

    if args.config:
        _apply_entries(cfg, _read_config_file(args.config))

    flags: dict[str, str] = {}
    for key in ("snr", "w", "threshold", "trials", "seed", "out"):
        value = getattr(args, key)
        if value is not None:
            flags[key] = str(value)
    if args.channel_mode is not None:
        flags["channel_mode"] = args.channel_mode
    _apply_entries(cfg, flags)

    _validate(cfg)
    return cfg


def _apply_entries(cfg: RunConfig, entries: dict[str, str]) -> None:
    int_keys = {"cp_len", "eff_len", "direct_order", "tag_order", "reflect_order",
                "trials", "seed"}
    for key, value in entries.items():
        if key in int_keys:
            try:
                setattr(cfg, key, int(value))
            except ValueError:
                raise ConfigError(f"{key}: expected an integer, got {value!r}") from None
        elif key == "noise_power":
            try:
                cfg.noise_power = float(value)
            except ValueError:
                raise ConfigError(f"noise_power: expected a number, got {value!r}") from None
        elif key == "tag_gain":
            try:
                cfg.tag_gain = complex(value)
            except ValueError:
                raise ConfigError(f"tag_gain: expected a complex number, got {value!r}") from None
        elif key == "snr":
            cfg.snr_values = _parse_snr_axis(value)
        elif key == "w":
            cfg.w_values = _parse_w_list(value)
        elif key == "threshold":
            if value not in _KIND_CHOICES:
                raise ConfigError(f"threshold: expected one of {sorted(_KIND_CHOICES)}, got {value!r}")
            cfg.kinds = _KIND_CHOICES[value]
        elif key == "channel_mode":
            if value not in _MODE_CHOICES:
                raise ConfigError(f"channel_mode: expected one of {sorted(_MODE_CHOICES)}, got {value!r}")
            cfg.mode = _MODE_CHOICES[value]
        elif key == "out":
            cfg.out_path = value
        else:
            raise ConfigError(f"unknown configuration key: {key}")


def _validate(cfg: RunConfig) -> None:
    base = {"cp_len": cfg.cp_len, "eff_len": cfg.eff_len,
            "direct_order": cfg.direct_order, "tag_order": cfg.tag_order,
            "reflect_order": cfg.reflect_order, "tag_gain": cfg.tag_gain,
            "noise_power": cfg.noise_power, "trials": cfg.trials, "seed": cfg.seed,
            "source_power": 1.0}
    for w in cfg.w_values:
        try:
            derive_params({**base, "window": w})
        except InvalidConfig as exc:
            raise ConfigError(f"W={w}: {exc}") from None


def _format_value(value: float | None) -> str:
    return "" if value is None else format(value, ".9g")


def _csv_lines(records: list[BerRecord]) -> list[str]:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(",".join([
            _format_value(r.snr_db), str(r.window), r.threshold_kind.value,
            r.channel_mode.value, str(r.trials), _format_value(r.empirical_ber),
            _format_value(r.stderr), _format_value(r.analytic_ber),
        ]))
    return lines


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".ber-", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def run(cfg: RunConfig) -> int:
    """Execute the configured sweep; returns the process exit code."""
    try:
        params = derive_params({
            "cp_len": cfg.cp_len, "eff_len": cfg.eff_len,
            "direct_order": cfg.direct_order, "tag_order": cfg.tag_order,
            "reflect_order": cfg.reflect_order, "tag_gain": cfg.tag_gain,
            "noise_power": cfg.noise_power, "trials": cfg.trials, "seed": cfg.seed,
            "source_power": 1.0, "window": cfg.w_values[0]})
        records = sweep(params, cfg.snr_values, cfg.w_values, cfg.kinds, cfg.mode,
                        np.random.SeedSequence(cfg.seed))
        _write_atomic(cfg.out_path, "\n".join(_csv_lines(records)) + "\n")
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    print(f"{'snr_db':>8} {'w':>4} {'threshold':>12} {'mode':>7} {'trials':>9} "
          f"{'empirical':>12} {'stderr':>12} {'analytic':>12}")
    for r in records:
        analytic = f"{r.analytic_ber:.6g}" if r.analytic_ber is not None else "-"
        print(f"{r.snr_db:8.6g} {r.window:4d} {r.threshold_kind.value:>12} "
              f"{r.channel_mode.value:>7} {r.trials:9d} {r.empirical_ber:12.6g} "
              f"{r.stderr:12.6g} {analytic:>12}")
    print(f"wrote {len(records)} rows to {cfg.out_path}")
    return 0


def main(argv: list[str] | None = None) -> None:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(2) from None
    raise SystemExit(run(cfg))


if __name__ == "__main__":
    main()
