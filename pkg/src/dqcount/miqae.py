"""Baseline iterative amplitude estimation without phase readout.

Maintains a confidence interval [theta_l, theta_u] for the amplitude angle
and repeatedly measures the amplified circuit at an odd factor K chosen so
that the K-scaled interval sits inside a single quadrant, which makes the
measured success probability sin^2(K * theta) invertible. K grows by at
least 3x whenever it changes, shots within a round are pooled into one
Chernoff-Hoeffding interval, and the loop stops once the angle interval is
narrower than 2*epsilon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import metrics
from .qsim import AnalyticSampler, Sampler

__all__ = [
    "AngleInterval",
    "MiqaeConfig",
    "MiqaeRound",
    "MiqaeResult",
    "chernoff_interval",
    "gamma_from_interval",
    "find_next_k",
    "run_miqae",
    "run_for_amplitude",
]

_HALF_PI = math.pi / 2

# Interval endpoints regularly land exactly on quadrant boundaries (clamped
# amplitudes map to gamma = 0 or pi/2, and rescue weights are built to hit
# the edge); the boundaries are inclusive, so give floor/ceil a hair of
# slack against rounding noise.
QUADRANT_SLACK = 1e-9


def quadrant_count(big_k: int, theta: float) -> int:
    """Number of quadrants the amplified angle has passed, floor(2K theta/pi)."""
    return math.floor(big_k * theta * 2 / math.pi + QUADRANT_SLACK)


def same_quadrant(big_k: int, theta_low: float, theta_high: float) -> bool:
    """True iff the amplified interval [K theta_low, K theta_high] fits in
    one quadrant (boundaries inclusive)."""
    return quadrant_count(big_k, theta_low) == math.ceil(
        big_k * theta_high * 2 / math.pi - QUADRANT_SLACK
    ) - 1


@dataclass(frozen=True)
class AngleInterval:
    """A confidence interval for the amplitude angle, inside [0, pi/2]."""

    theta_low: float
    theta_high: float

    def __post_init__(self) -> None:
        if not 0 <= self.theta_low <= self.theta_high <= _HALF_PI:
            raise ValueError(
                f"invalid angle interval [{self.theta_low}, {self.theta_high}]"
            )

    @property
    def width(self) -> float:
        return self.theta_high - self.theta_low

    def amplitudes(self) -> tuple[float, float]:
        """The interval mapped to amplitude scale, [sin^2 low, sin^2 high]."""
        return math.sin(self.theta_low) ** 2, math.sin(self.theta_high) ** 2


@dataclass(frozen=True)
class MiqaeConfig:
    epsilon: float
    alpha: float
    shots_per_batch: int = 100

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.shots_per_batch < 1:
            raise ValueError("shots_per_batch must be positive")


@dataclass(frozen=True)
class MiqaeRound:
    """Trace record of one round (one K value)."""

    index: int
    big_k: int
    quadrant: int
    shots: int
    shots_cap: int
    a_hat: float
    a_min: float
    a_max: float
    theta_low: float
    theta_high: float


@dataclass
class MiqaeResult:
    a_low: float
    a_high: float
    status: str
    oracle_calls: int
    oracle_calls_physical: int
    total_shots: int
    max_big_k: int
    rounds: list[MiqaeRound] = field(default_factory=list)

    @property
    def estimate(self) -> float:
        return 0.5 * (self.a_low + self.a_high)

    @property
    def succeeded(self) -> bool:
        return self.status == "success"

    @property
    def angle_interval(self) -> AngleInterval:
        return AngleInterval(
            math.asin(math.sqrt(self.a_low)), math.asin(math.sqrt(self.a_high))
        )


def chernoff_interval(a_hat: float, n_samples: int, alpha_i: float) -> tuple[float, float]:
    """Two-sided Chernoff-Hoeffding interval, half-width sqrt(ln(2/a)/(2N))."""
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    if not 0 <= a_hat <= 1:
        raise ValueError("a_hat must lie in [0, 1]")
    if not 0 < alpha_i < 1:
        raise ValueError("alpha_i must lie in (0, 1)")
    eps_a = math.sqrt(math.log(2 / alpha_i) / (2 * n_samples))
    return max(0.0, a_hat - eps_a), min(1.0, a_hat + eps_a)


def gamma_from_interval(a_min: float, a_max: float, quadrant_count: int) -> tuple[float, float]:
    """Invert sin^2 on one quadrant: bounds for the within-quadrant angle.

    Even quadrant counts map [a_min, a_max] to [asin sqrt(a_min),
    asin sqrt(a_max)]; odd ones mirror the interval to [pi/2 - asin
    sqrt(a_max), pi/2 - asin sqrt(a_min)].
    """
    if not 0 <= a_min <= a_max <= 1:
        raise ValueError(f"invalid amplitude interval [{a_min}, {a_max}]")
    if quadrant_count < 0:
        raise ValueError("quadrant count must be non-negative")
    lo = math.asin(math.sqrt(a_min))
    hi = math.asin(math.sqrt(a_max))
    if quadrant_count % 2 == 0:
        return lo, hi
    return _HALF_PI - hi, _HALF_PI - lo


def find_next_k(k_i: int, theta_low: float, theta_high: float) -> int:
    """Largest odd K <= pi/(2*width) with K >= 3*K_i that keeps the scaled
    interval inside one quadrant; returns k_i unchanged if none exists."""
    if theta_high <= theta_low:
        raise ValueError("angle interval must have positive width")
    big_k_i = 2 * k_i + 1
    big_k = int(math.pi / (2 * (theta_high - theta_low)))
    if big_k % 2 == 0:
        big_k -= 1
    while big_k >= 3 * big_k_i:
        if same_quadrant(big_k, theta_low, theta_high):
            return (big_k - 1) // 2
        big_k -= 2
    return k_i


def run_miqae(
    config: MiqaeConfig,
    sampler: Sampler,
) -> MiqaeResult:
    """Run the estimation loop against a measurement sampler.

    The sampler is queried as sample(power, 1.0, shots); the rotation
    parameter is pinned to 1 so the good-state probability is
    sin^2((2*power+1)*theta). On a round that exhausts its shot budget
    without finding a larger K while still unconverged, the run stops with
    status "failed" and the current interval.
    """
    eps = config.epsilon
    alpha = config.alpha
    batch_size = config.shots_per_batch
    k_max = math.pi / (4 * eps)

    theta_low, theta_high = 0.0, _HALF_PI
    k_i = 0
    rounds: list[MiqaeRound] = []
    calls = calls_physical = shots_total = 0
    max_big_k = 1
    status = "success"

    i = 0
    while theta_high - theta_low > 2 * eps:
        i += 1
        big_k = 2 * k_i + 1
        alpha_i = (2 * alpha / 3) * (big_k / k_max)
        n_cap = metrics.shots_cap(alpha_i)
        quadrant = quadrant_count(big_k, theta_low)
        ones = 0
        n_round = 0
        a_hat = a_min = a_max = 0.0
        failed = False
        while True:
            batch = min(batch_size, n_cap - n_round)
            ones += sampler.sample(k_i, 1.0, batch)
            n_round += batch
            shots_total += batch
            calls += k_i * batch
            calls_physical += big_k * batch
            max_big_k = max(max_big_k, big_k)
            a_hat = ones / n_round
            a_min, a_max = chernoff_interval(a_hat, n_round, alpha_i)
            gamma_low, gamma_high = gamma_from_interval(a_min, a_max, quadrant)
            theta_low = (quadrant * _HALF_PI + gamma_low) / big_k
            theta_high = (quadrant * _HALF_PI + gamma_high) / big_k
            if theta_high - theta_low < 2 * eps:
                break
            k_next = find_next_k(k_i, theta_low, theta_high)
            if k_next != k_i:
                k_i = k_next
                break
            if n_round >= n_cap:
                failed = True
                break
        rounds.append(
            MiqaeRound(
                index=i,
                big_k=big_k,
                quadrant=quadrant,
                shots=n_round,
                shots_cap=n_cap,
                a_hat=a_hat,
                a_min=a_min,
                a_max=a_max,
                theta_low=theta_low,
                theta_high=theta_high,
            )
        )
        if failed:
            status = "failed"
            break

    return MiqaeResult(
        a_low=math.sin(theta_low) ** 2,
        a_high=math.sin(theta_high) ** 2,
        status=status,
        oracle_calls=calls,
        oracle_calls_physical=calls_physical,
        total_shots=shots_total,
        max_big_k=max_big_k,
        rounds=rounds,
    )


def run_for_amplitude(
    amplitude: float,
    config: MiqaeConfig,
    seed: Union[int, np.random.Generator] = 0,
) -> MiqaeResult:
    """Convenience wrapper: estimate a known amplitude with a seeded sampler."""
    return run_miqae(config, AnalyticSampler.from_amplitude(amplitude, seed))
