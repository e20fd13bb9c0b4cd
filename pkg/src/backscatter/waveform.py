"""Source symbol synthesis, tag gating and the reader's received samples.

The tag never generates a carrier: it either reflects the incident samples
or stays silent. The gate confines reflection to the prefix interval
``[max_order, cp_len - reflect_order - 1]`` so that, after the reflect-path
spread, backscatter energy stays inside the prefix and legacy receivers
(which drop the prefix) see nothing of it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ChannelSet, FrameOrigin, SymbolFrame, SystemParams, complex_normal


@dataclass(frozen=True)
class GateSequence:
    """Per-sample 0/1 reflection gate for one symbol period, carrying one bit."""

    gate: np.ndarray
    bit: int


def taps_convolve(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Causal FIR filter with zero pre-history, output trimmed to ``len(x)``.

    The direct convolution accumulates in the same tap order at every output
    position, so two positions whose input windows are bitwise identical
    produce bitwise-identical outputs. The prefix/body cancellation relies
    on this.
    """
    return np.convolve(np.asarray(x, dtype=complex), np.asarray(taps, dtype=complex))[: len(x)]


def gen_source_symbol(params: SystemParams, rng: np.random.Generator) -> SymbolFrame:
    """One source symbol: Gaussian body plus verbatim cyclic prefix.

    Body samples are i.i.d. circularly-symmetric with power
    ``source_power``; the subcarrier content is irrelevant to every statistic
    downstream, so no transform is involved. The prefix copies the last
    ``cp_len`` body samples bit for bit.
    """
    n, c = params.eff_len, params.cp_len
    body = complex_normal(rng, n, params.source_power)
    frame = np.empty(c + n, dtype=complex)
    frame[c:] = body
    frame[:c] = body[n - c:]
    return SymbolFrame(samples=frame, origin=FrameOrigin.SOURCE)


def tag_gate(params: SystemParams, bit: int) -> GateSequence:
    """Reflection gate for ``bit``: open on the interior prefix window only.

    For bit 1 the gate is one on ``[max_order, cp_len - reflect_order - 1]``
    (``block_len`` samples) and zero elsewhere; for bit 0 it is all zero.
    """
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    gate = np.zeros(params.cp_len + params.eff_len)
    if bit:
        gate[params.max_order: params.cp_len - params.reflect_order] = 1.0
    return GateSequence(gate=gate, bit=bit)


def tag_input(source: SymbolFrame, tag_taps: np.ndarray) -> SymbolFrame:
    """Samples arriving at the tag antenna: source filtered by the tag path."""
    if source.origin is not FrameOrigin.SOURCE:
        raise ValueError(f"expected a source frame, got {source.origin}")
    return SymbolFrame(samples=taps_convolve(source.samples, tag_taps),
                       origin=FrameOrigin.TAG_INPUT)


def synth_reader_rx(source: SymbolFrame, tag_in: SymbolFrame, gate: GateSequence,
                    channels: ChannelSet, params: SystemParams,
                    rng: np.random.Generator | None = None) -> SymbolFrame:
    """Received samples at the reader for one symbol period.

    Direct path plus the attenuated reflection of the gated tag input, plus
    white noise of power ``noise_power``. Pass ``rng=None`` for a noiseless
    frame (diagnostics and exactness tests).
    """
    if source.origin is not FrameOrigin.SOURCE or tag_in.origin is not FrameOrigin.TAG_INPUT:
        raise ValueError("synth_reader_rx needs a source frame and a tag-input frame")
    direct = taps_convolve(source.samples, channels.direct)
    reflected = taps_convolve(gate.gate * tag_in.samples, channels.reflect)
    y = direct + params.tag_gain * reflected
    if rng is not None:
        y = y + complex_normal(rng, len(y), params.noise_power)
    return SymbolFrame(samples=y, origin=FrameOrigin.READER_RX)


def legacy_window(frame: SymbolFrame, params: SystemParams) -> np.ndarray:
    """The samples a legacy receiver keeps: the body, with the prefix dropped."""
    if frame.origin is not FrameOrigin.READER_RX:
        raise ValueError(f"expected a reader frame, got {frame.origin}")
    return frame.samples[params.cp_len:]
