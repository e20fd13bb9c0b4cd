"""Monte Carlo engine: per-trial pipeline, BER estimation and sweeps.

Every trial derives its own random stream from (seed, point, trial index),
so results are identical for any worker count or chunking, and aggregation
is a plain error-count sum. Trials are independent symbols: zero
pre-history is safe because every processed sample sits at least
``max_order`` taps past the symbol start.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from itertools import product

import numpy as np

from .core import (ChannelSet, InvalidConfig, SystemParams, draw_channels, generator,
                   substream)
from .detector import ThresholdKind, analytic_ber, compute_scales, detect, threshold_for
from .reader import cancel_interference, dft, fold, energy_statistics
from .waveform import gen_source_symbol, synth_reader_rx, tag_gate, tag_input


class ChannelMode(Enum):
    FIXED_REALIZATION = "fixed"
    REDRAW_PER_TRIAL = "redraw"


@dataclass(frozen=True)
class TrialOutcome:
    true_bit: int
    decided_bit: int
    statistic: float
    threshold: float


@dataclass(frozen=True)
class BerRecord:
    """One sweep-point result row.

    ``analytic_ber`` holds the Gaussian-model prediction for the fixed
    realization and threshold of the point; it is None when channels are
    redrawn per trial, where no single realization applies.
    """

    snr_db: float
    window: int
    threshold_kind: ThresholdKind
    channel_mode: ChannelMode
    trials: int
    empirical_ber: float
    stderr: float
    analytic_ber: float | None


def params_at_snr(params: SystemParams, snr_db: float) -> SystemParams:
    """Copy of ``params`` with the source power set to the requested SNR.

    SNR is defined against the per-sample noise power:
    ``snr_db = 10 log10(source_power / noise_power)``.
    """
    return replace(params, source_power=params.noise_power * 10.0 ** (snr_db / 10.0))


def run_trial(params: SystemParams, channels: ChannelSet, bit: int, threshold: float,
              rng: np.random.Generator) -> TrialOutcome:
    """One symbol through the full chain, decided from the first statistic window."""
    source = gen_source_symbol(params, rng)
    tagged = tag_input(source, channels.tag)
    gate = tag_gate(params, bit)
    rx = synth_reader_rx(source, tagged, gate, channels, params, rng)
    cancelled = cancel_interference(rx, params)
    spectrum = dft(fold(cancelled, params))
    stat = float(energy_statistics(spectrum, params.window)[0])
    return TrialOutcome(true_bit=bit, decided_bit=detect(stat, threshold),
                        statistic=stat, threshold=threshold)


def _count_errors(params: SystemParams, mode: ChannelMode, kind: ThresholdKind,
                  channels: ChannelSet | None, threshold: float | None,
                  point: np.random.SeedSequence, start: int, stop: int) -> int:
    """Errors over trials [start, stop); the chunk worker."""
    errors = 0
    for t in range(start, stop):
        rng = generator(substream(point, 1, t))
        bit = int(rng.integers(0, 2))
        if mode is ChannelMode.REDRAW_PER_TRIAL:
            ch = draw_channels(params, rng)
            th = threshold if threshold is not None else threshold_for(
                kind, compute_scales(params, ch), params.window)
        else:
            assert channels is not None and threshold is not None
            ch, th = channels, threshold
        outcome = run_trial(params, ch, bit, th, rng)
        if outcome.decided_bit != bit:
            errors += 1
    return errors


def estimate_ber(params: SystemParams, kind: ThresholdKind, mode: ChannelMode,
                 snr_db: float, stream: np.random.SeedSequence, *,
                 threshold_override: float | None = None,
                 workers: int = 1) -> BerRecord:
    """Empirical BER at one operating point, bits drawn equiprobably.

    Fixed mode draws one channel realization up front (substream 0 of the
    point), computes the threshold once and reports the matching
    Gaussian-model prediction. Redraw mode draws channels and recomputes the
    genie threshold inside every trial and reports no prediction.

    ``threshold_override`` replaces the computed threshold (useful when the
    scales are degenerate, e.g. zero tag gain).
    """
    p = params_at_snr(params, snr_db)
    channels: ChannelSet | None = None
    threshold: float | None = threshold_override
    analytic: float | None = None
    if mode is ChannelMode.FIXED_REALIZATION:
        channels = draw_channels(p, generator(substream(stream, 0)))
        scales = compute_scales(p, channels)
        if threshold is None:
            threshold = threshold_for(kind, scales, p.window)
        analytic = analytic_ber(threshold, scales, p.window)

    n = p.trials
    if workers <= 1 or n < 2 * workers:
        errors = _count_errors(p, mode, kind, channels, threshold, stream, 0, n)
    else:
        bounds = np.linspace(0, n, workers + 1, dtype=int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_count_errors_star,
                             [(p, mode, kind, channels, threshold, stream, int(a), int(b))
                              for a, b in zip(bounds[:-1], bounds[1:])])
        errors = sum(parts)

    ber = errors / n
    return BerRecord(snr_db=snr_db, window=p.window, threshold_kind=kind,
                     channel_mode=mode, trials=n, empirical_ber=ber,
                     stderr=math.sqrt(ber * (1.0 - ber) / n), analytic_ber=analytic)


def _count_errors_star(args) -> int:
    return _count_errors(*args)


def sweep(params: SystemParams, snr_values: list[float], w_values: list[int],
          kinds: list[ThresholdKind], mode: ChannelMode,
          stream: np.random.SeedSequence, *, workers: int = 1) -> list[BerRecord]:
    """BER over the (window x SNR x threshold kind) grid, one record per cell.

    Each cell gets its own substream keyed by enumeration order, so a rerun
    with the same stream reproduces every record bit for bit.
    """
    if not snr_values or not w_values or not kinds:
        raise ValueError("sweep needs non-empty snr_values, w_values and kinds")
    for w in w_values:
        if not 1 <= w <= params.block_len:
            raise InvalidConfig(f"window must satisfy 1 <= window <= block_len="
                                f"{params.block_len}, got {w}")
    records = []
    for idx, ((w, snr), kind) in enumerate(product(product(w_values, snr_values), kinds)):
        p = replace(params, window=w)
        records.append(estimate_ber(p, kind, mode, snr, substream(stream, idx),
                                    workers=workers))
    return records
