"""Detection scales, thresholds, the decision rule and the closed-form BER.

The decision statistic for each hypothesis is modelled as Gaussian,
``N(noise_floor, noise_floor^2 / window)`` when the tag is silent and
``N(lift + floor, (lift + floor)^2 / window)`` when it reflects. Both
thresholds are genie-aided: they consume the exact scales of the true
channel realization.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import ChannelSet, SystemParams

log = logging.getLogger(__name__)

# One-sided Gaussian-tail approximation exp(-b x - a x^2) / 2.
Q_APPROX_A = 0.416
Q_APPROX_B = 0.717


class DegenerateScales(ValueError):
    """Both hypotheses coincide (no energy lift); no threshold exists."""


class NoRealRoot(ArithmeticError):
    """The closed-form threshold quadratic has no real solution."""


class DomainError(ValueError):
    """Argument outside the domain of a one-sided approximation."""


@dataclass(frozen=True)
class DetectionScales:
    """Mean statistic levels of the two hypotheses, in linear power units.

    ``noise_floor`` is the silent-tag mean; ``signal_lift`` is the extra mean
    energy a reflecting tag adds on top of it.
    """

    signal_lift: float
    noise_floor: float


class ThresholdKind(Enum):
    OPTIMAL = "optimal"
    EQUIPROBABLE = "equiprobable"


def compute_scales(params: SystemParams, channels: ChannelSet) -> DetectionScales:
    """Scales for a known channel realization.

    lift  = block_len * |tag_gain|^2 * source_power
            * sum|tag taps|^2 * sum|reflect taps|^2
    floor = 2 * cancel_len * noise_power

    The floor doubles the per-sample noise power because cancellation
    subtracts two independent noisy windows, and counts ``cancel_len``
    samples because folding conserves total noise energy.
    """
    tag_energy = float(np.sum(np.abs(channels.tag) ** 2))
    reflect_energy = float(np.sum(np.abs(channels.reflect) ** 2))
    lift = (params.block_len * abs(params.tag_gain) ** 2 * params.source_power
            * tag_energy * reflect_energy)
    floor = 2.0 * params.cancel_len * params.noise_power
    return DetectionScales(signal_lift=lift, noise_floor=floor)


def qfunc(x: float) -> float:
    """Gaussian tail probability, exact via the complementary error function."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def qfunc_approx(x: float) -> float:
    """Exponential upper-tail approximation, valid for x >= 0 only."""
    if x < 0:
        raise DomainError(f"qfunc_approx requires x >= 0, got {x}")
    return math.exp(-Q_APPROX_B * x - Q_APPROX_A * x * x) / 2.0


def _check_scales(scales: DetectionScales) -> tuple[float, float]:
    lift, floor = scales.signal_lift, scales.noise_floor
    if not floor > 0:
        raise ValueError(f"noise_floor must be > 0, got {floor}")
    if not lift > 0:
        raise DegenerateScales(f"signal_lift must be > 0 for a threshold, got {lift}")
    return lift, floor


def optimal_threshold(scales: DetectionScales, window: int) -> float:
    """Statistic level where the two hypothesis densities are equal.

    Solves
        ((t - floor)/floor)^2 - ((t - lift - floor)/(lift + floor))^2
            = (2/window) * ln((lift + floor)/floor)
    for its unique positive root. When the lift dominates the floor the root
    lies strictly between the two hypothesis means; for very small
    lift-to-floor ratios (below roughly ``2/window``) the density crossing
    moves above the high mean, which is the correct equality point even
    though it leaves the bracket.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    lift, floor = _check_scales(scales)
    high = lift + floor
    logratio = math.log1p(lift / floor)
    root = (floor * high / (lift + 2.0 * floor)
            * (1.0 + math.sqrt(1.0 + (2.0 * logratio / window) * (lift + 2.0 * floor) / lift)))
    if log.isEnabledFor(logging.DEBUG):
        alt = optimal_threshold_simplified(scales, window)
        log.debug("optimal threshold %.9g, simplified closed form %.9g, discrepancy %.3g",
                  root, alt, abs(root - alt))
    return root


def optimal_threshold_simplified(scales: DetectionScales, window: int) -> float:
    """Simplified closed form that adds the log term under the radical.

    The term added to the squared mean product is dimensionless, so the
    expression is not unit-consistent and is kept for comparison only: for
    any realistic scale it collapses towards ``2*floor*high/(lift+2*floor)``,
    the equal-error-probability point, rather than the density-equality root.
    """
    lift, floor = _check_scales(scales)
    high = lift + floor
    logratio = math.log1p(lift / floor)
    radicand = (floor * high) ** 2 + (2.0 + 4.0 * floor / lift) * logratio / window
    return (floor * high + math.sqrt(radicand)) / (lift + 2.0 * floor)


def equiprobable_threshold(scales: DetectionScales, window: int) -> float:
    """Threshold equalizing the two error probabilities, via the tail approximation.

    With ``Q(x) ~ exp(-b x - a x^2)/2`` the balance condition becomes a
    quadratic ``c0 t^2 + c1 t + c2 = 0`` with

        c0 = a sqrt(window) (lift^2 + 2 lift floor) / (floor (lift + floor))
        c1 = b (lift + 2 floor) - 2 a sqrt(window) lift
        c2 = -2 b floor (lift + floor)

    whose single positive root is returned. ``c0 > 0`` and ``c2 < 0`` for any
    positive scales, so the discriminant check is defensive only.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    lift, floor = _check_scales(scales)
    high = lift + floor
    sw = math.sqrt(window)
    c0 = Q_APPROX_A * sw * (lift * lift + 2.0 * lift * floor) / (floor * high)
    c1 = Q_APPROX_B * (lift + 2.0 * floor) - 2.0 * Q_APPROX_A * sw * lift
    c2 = -2.0 * Q_APPROX_B * floor * high
    disc = c1 * c1 - 4.0 * c0 * c2
    if disc < 0:
        raise NoRealRoot(f"discriminant {disc} < 0 for scales {scales} window {window}")
    return (-c1 + math.sqrt(disc)) / (2.0 * c0)


def equiprobable_threshold_exact(scales: DetectionScales, window: int) -> float:
    """Reference equal-error threshold from the exact tail, by bisection.

    The miss probability rises and the false-alarm probability falls as the
    threshold sweeps from the low mean to the high one, so their difference
    has a single sign change inside that bracket.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    lift, floor = _check_scales(scales)
    high = lift + floor
    sw = math.sqrt(window)

    def balance(t: float) -> float:
        return qfunc((t - floor) * sw / floor) - qfunc((high - t) * sw / high)

    lo, hi = floor, high
    f_lo = balance(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = balance(mid)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def threshold_for(kind: ThresholdKind, scales: DetectionScales, window: int) -> float:
    if kind is ThresholdKind.OPTIMAL:
        return optimal_threshold(scales, window)
    return equiprobable_threshold(scales, window)


def detect(statistic: float, threshold: float) -> int:
    """1 when the statistic exceeds the threshold, else 0; ties resolve to 0."""
    return 1 if statistic > threshold else 0


def analytic_ber(threshold: float, scales: DetectionScales, window: int) -> float:
    """Error probability of the threshold rule under the Gaussian model.

    Equiprobable bits: half the false-alarm probability plus half the miss
    probability,
        1/2 + Q((t - floor) sqrt(W)/floor)/2 - Q((t - high) sqrt(W)/high)/2.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    floor = scales.noise_floor
    if not floor > 0:
        raise ValueError(f"noise_floor must be > 0, got {floor}")
    high = scales.signal_lift + floor
    sw = math.sqrt(window)
    return (0.5 + 0.5 * qfunc((threshold - floor) * sw / floor)
            - 0.5 * qfunc((threshold - high) * sw / high))
