"""Per-node distributed counting estimator.

Each node estimates the marked fraction a_j of its index slice by iterative
amplitude estimation with two extensions over the baseline in `miqae`:

* Two-stage amplification: while the amplitude interval is still wide
  (>= 50 epsilon), the next odd factor K only has to grow 2x; once narrow,
  3x. Growing slower early keeps the per-round significance small while
  circuits are cheap, and the significance budget alpha_i proportional to
  K/K_max lets the shot cap shrink as circuits get deep.

* Rotation rescaling: when no larger K keeps the scaled interval inside a
  single quadrant, the auxiliary-qubit weight r < 1 shrinks the effective
  angle arcsin(sqrt(r) sin theta) until some large K does. A round whose
  measured interval is inconsistent with the current r (sin^2 of the
  inferred angle exceeding r) is discarded and the previous interval
  restored ("backtracking"); the r branch of the K search is then disabled
  until a plain-condition K succeeds.

A round consumes its full shot budget N_max before anything is decided:
the budget is calibrated so that the pooled Chernoff interval at
exhaustion is narrow enough for the K search to succeed, and only then are
the interval update, the convergence test, and the K search evaluated. A
round whose search comes up empty is granted one more full budget at the
same K with its counts carried over; a second stall ends the run as
failed, still reporting the current estimate.

Convergence is measured on amplitude scale: the loop stops when
sin^2(theta_max) - sin^2(theta_min) <= 2 epsilon. The final estimate is an
inverse-width weighted average over every round whose interval reached
3 epsilon, scaled by 2^m and rounded to the nearest integer.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Union

from . import metrics
from .miqae import chernoff_interval, gamma_from_interval, quadrant_count, same_quadrant
from .oracle import SubOracle
from .qsim import AnalyticSampler, Sampler, StatevectorSampler

__all__ = [
    "DiqcConfig",
    "RoundRecord",
    "NodeResult",
    "EstimationIncompleteError",
    "find_next_k",
    "post_process",
    "run_node",
    "run_amplitude",
]

_HALF_PI = math.pi / 2


class EstimationIncompleteError(RuntimeError):
    """No round produced an interval narrow enough to post-process."""


@dataclass(frozen=True)
class DiqcConfig:
    """Per-node estimation parameters.

    `epsilon_node`/`alpha_node` are the per-node target half-width and
    significance (a coordinator divides its global budget by the node
    count before building these). `wide_round_factor` is the threshold of
    the two-stage rule: amplitude-interval width >= wide_round_factor *
    epsilon_node selects growth factor 2, otherwise 3.
    """

    epsilon_node: float
    alpha_node: float
    shots_per_batch: int = 1
    wide_round_factor: float = 50.0

    def __post_init__(self) -> None:
        if not 0 < self.epsilon_node <= 0.01:
            raise ValueError("epsilon_node must lie in (0, 0.01]")
        if not 0 < self.alpha_node < 0.75:
            raise ValueError("alpha_node must lie in (0, 3/4)")
        if self.shots_per_batch < 1:
            raise ValueError("shots_per_batch must be positive")
        if self.wide_round_factor <= 0:
            raise ValueError("wide_round_factor must be positive")


@dataclass(frozen=True)
class RoundRecord:
    """Trace of one round: one (K, r) pair and its pooled measurements.

    `shots` counts this round's measurements; `pooled_shots` the total the
    interval was computed from, which exceeds `shots` only when a stalled
    round was granted a second budget at the same K and the counts carried
    over.
    """

    index: int
    big_k: int
    quadrant: int
    r: float
    q: int
    shots: int
    pooled_shots: int
    shots_cap: int
    a_hat: float
    a_min: float
    a_max: float
    theta_min: float
    theta_max: float
    backtracked: bool

    @property
    def a_width(self) -> float:
        """Width of the round's interval on amplitude scale."""
        return math.sin(self.theta_max) ** 2 - math.sin(self.theta_min) ** 2

    @property
    def a_bounds(self) -> tuple[float, float]:
        return math.sin(self.theta_min) ** 2, math.sin(self.theta_max) ** 2


@dataclass
class NodeResult:
    """One node's estimate plus resource counters.

    `a_low`/`a_high` bound the marked fraction of the slice; `scaled_low`/
    `scaled_high` are the same bounds times 2^m. `c` is the real-valued
    count estimate 2^m * (weighted amplitude) and `t_prime` its nearest
    integer. `oracle_calls` counts one query per amplification iterate per
    shot (the convention used by the query bound); `oracle_calls_physical`
    counts every state preparation, i.e. (2*power+1) per shot.
    """

    node_id: int
    m: int
    epsilon_node: float
    alpha_node: float
    seed: int
    a_low: float
    a_high: float
    c: float
    t_prime: int
    scaled_low: float
    scaled_high: float
    status: str
    oracle_calls: int
    oracle_calls_physical: int
    total_shots: int
    max_big_k: int
    rounds: list[RoundRecord] = field(default_factory=list)

    @property
    def succeeded(self) -> bool:
        return self.status == "success"

    def to_dict(self, include_rounds: bool = False) -> dict:
        out = {
            "node_id": self.node_id,
            "m": self.m,
            "epsilon_node": self.epsilon_node,
            "alpha_node": self.alpha_node,
            "seed": self.seed,
            "a_low": self.a_low,
            "a_high": self.a_high,
            "c": self.c,
            "t_prime": self.t_prime,
            "scaled_low": self.scaled_low,
            "scaled_high": self.scaled_high,
            "status": self.status,
            "oracle_calls": self.oracle_calls,
            "oracle_calls_physical": self.oracle_calls_physical,
            "total_shots": self.total_shots,
            "max_big_k": self.max_big_k,
        }
        if include_rounds:
            out["rounds"] = [dataclasses.asdict(rd) for rd in self.rounds]
        return out


def find_next_k(
    theta_min: float,
    theta_max: float,
    q: int,
    big_k_current: int,
    backtracked: bool,
    big_k_cap: Union[int, None] = None,
) -> tuple[int, Union[float, None]]:
    """Search for the next odd amplification factor and rotation weight.

    Scans odd K downward from the largest odd integer <= pi/(2*width)
    while K >= q*K_current. At each K the plain same-quadrant condition is
    tried first and returns (K, 1.0). If it fails and no backtracking has
    occurred this round, the rescue weight r = sin^2((R+1)pi/(2K)) /
    sin^2(theta_max) is admitted when it exceeds both sin^2(pi/2 (1-1/K))
    and 3/4 and the rescaled angles share a quadrant, returning (K, r).
    Returns (K_current, None) when no factor qualifies; the caller keeps
    its current r.

    `big_k_cap` optionally caps the scan two below it so the returned K
    stays strictly under the run's depth cap.
    """
    if not 0 <= theta_min < theta_max <= _HALF_PI:
        raise ValueError(f"invalid angle interval [{theta_min}, {theta_max}]")
    if q not in (2, 3):
        raise ValueError("growth factor q must be 2 or 3")
    big_k = 2 * int(math.pi / (4 * (theta_max - theta_min)) - 0.5) + 1
    if big_k_cap is not None and big_k > big_k_cap - 2:
        big_k = big_k_cap - 2
    sin_lo = math.sin(theta_min)
    sin_hi = math.sin(theta_max)
    sin2_hi = sin_hi * sin_hi
    while big_k >= q * big_k_current:
        if same_quadrant(big_k, theta_min, theta_max):
            return big_k, 1.0
        if not backtracked:
            quadrant = quadrant_count(big_k, theta_min)
            r = math.sin((quadrant + 1) * math.pi / (2 * big_k)) ** 2 / sin2_hi
            if r > max(math.sin(_HALF_PI * (1 - 1 / big_k)) ** 2, 0.75):
                root_r = math.sqrt(r)
                scaled_lo = math.asin(min(1.0, root_r * sin_lo))
                scaled_hi = math.asin(min(1.0, root_r * sin_hi))
                if same_quadrant(big_k, scaled_lo, scaled_hi):
                    return big_k, r
        big_k -= 2
    return big_k_current, None


def post_process(
    rounds: list[RoundRecord], epsilon_node: float, m: int
) -> tuple[float, int, tuple[float, float]]:
    """Inverse-width weighted average over the qualifying rounds.

    Uses every round whose amplitude interval is at most 3*epsilon wide.
    Returns (c, t_prime, scaled interval) where c = 2^m * abar, t_prime is
    c rounded half away from zero, and the interval is 2^m * [abar -/+
    1.5*epsilon] clamped to the slice.
    """
    if m < 0:
        raise ValueError("register width must be non-negative")
    qualifying = [rd for rd in rounds if rd.a_width <= 3 * epsilon_node]
    if not qualifying:
        raise EstimationIncompleteError(
            f"no round reached width 3*epsilon = {3 * epsilon_node}"
        )
    weight_sum = 0.0
    acc = 0.0
    for rd in qualifying:
        lo, hi = rd.a_bounds
        w = 1.0 / (hi - lo)
        acc += w * 0.5 * (lo + hi)
        weight_sum += w
    a_bar = acc / weight_sum
    scale = 1 << m
    c = scale * a_bar
    t_prime = math.floor(c + 0.5)
    lo = scale * max(0.0, a_bar - 1.5 * epsilon_node)
    hi = scale * min(1.0, a_bar + 1.5 * epsilon_node)
    return c, t_prime, (lo, hi)


def _estimate(
    sampler: Sampler,
    m: int,
    config: DiqcConfig,
    seed: int,
    node_id: int,
) -> NodeResult:
    eps = config.epsilon_node
    alpha = config.alpha_node
    batch_size = config.shots_per_batch
    big_k_cap = metrics.k_max_cap(eps)

    theta_min, theta_max = 0.0, _HALF_PI
    big_k = 1
    r = 1.0
    rounds: list[RoundRecord] = []
    pooled_ones = 0
    pooled_shots = 0
    retried_at = 0  # K that already received a second full budget
    failed = False
    calls = calls_physical = shots_total = 0
    max_big_k = 1

    def a_width() -> float:
        return math.sin(theta_max) ** 2 - math.sin(theta_min) ** 2

    i = 0
    while a_width() > 2 * eps and not failed:
        i += 1
        q = 2 if a_width() >= config.wide_round_factor * eps else 3
        alpha_i = (q - 1) * alpha * big_k / (q * big_k_cap)
        n_cap = metrics.shots_cap(alpha_i)
        quadrant = quadrant_count(
            big_k, math.asin(math.sqrt(r) * math.sin(theta_min))
        )
        prev_min, prev_max = theta_min, theta_max
        backtracked = False
        power = (big_k - 1) // 2
        n_round = 0
        while n_round < n_cap:
            batch = min(batch_size, n_cap - n_round)
            pooled_ones += sampler.sample(power, r, batch)
            pooled_shots += batch
            n_round += batch
            shots_total += batch
            calls += power * batch
            calls_physical += big_k * batch
        a_hat = pooled_ones / pooled_shots
        a_min, a_max = chernoff_interval(a_hat, pooled_shots, alpha_i)
        gamma_low, gamma_high = gamma_from_interval(a_min, a_max, quadrant)
        rescaled_min = (quadrant * _HALF_PI + gamma_low) / big_k
        rescaled_max = (quadrant * _HALF_PI + gamma_high) / big_k
        sin2_min = math.sin(rescaled_min) ** 2
        sin2_max = math.sin(rescaled_max) ** 2
        if sin2_min > r or sin2_max > r:
            theta_min, theta_max = prev_min, prev_max
            backtracked = True
        else:
            theta_min = math.asin(math.sqrt(sin2_min / r))
            theta_max = math.asin(math.sqrt(sin2_max / r))
        rounds.append(
            RoundRecord(
                index=i,
                big_k=big_k,
                quadrant=quadrant,
                r=r,
                q=q,
                shots=n_round,
                pooled_shots=pooled_shots,
                shots_cap=n_cap,
                a_hat=a_hat,
                a_min=a_min,
                a_max=a_max,
                theta_min=theta_min,
                theta_max=theta_max,
                backtracked=backtracked,
            )
        )
        if a_width() <= 2 * eps:
            break
        new_k, new_r = find_next_k(
            theta_min, theta_max, q, big_k, backtracked, big_k_cap=big_k_cap
        )
        if new_k != big_k:
            big_k = new_k
            assert new_r is not None
            r = new_r
            max_big_k = max(max_big_k, big_k)
            pooled_ones = pooled_shots = 0
            retried_at = 0
        else:
            # Stalled: grant one more full budget at this K with the counts
            # carried over; a second stall at the same K ends the run.
            if retried_at == big_k:
                failed = True
            else:
                retried_at = big_k

    status = "failed" if failed else "success"
    try:
        c, t_prime, (scaled_low, scaled_high) = post_process(rounds, eps, m)
    except EstimationIncompleteError:
        # Failed before any interval reached 3*epsilon: report the last one.
        c, t_prime, (scaled_low, scaled_high) = post_process(
            rounds[-1:], rounds[-1].a_width / 3, m
        )
    scale = 1 << m
    return NodeResult(
        node_id=node_id,
        m=m,
        epsilon_node=eps,
        alpha_node=alpha,
        seed=seed,
        a_low=scaled_low / scale,
        a_high=scaled_high / scale,
        c=c,
        t_prime=t_prime,
        scaled_low=scaled_low,
        scaled_high=scaled_high,
        status=status,
        oracle_calls=calls,
        oracle_calls_physical=calls_physical,
        total_shots=shots_total,
        max_big_k=max_big_k,
        rounds=rounds,
    )


def run_node(
    sub: SubOracle,
    config: DiqcConfig,
    sampler: Union[Sampler, None] = None,
    seed: int = 0,
    backend: str = "analytic",
) -> NodeResult:
    """Estimate one sub-oracle's marked count.

    When no sampler is supplied one is built from the sub-oracle on the
    requested backend, seeded with `seed`.
    """
    if sampler is None:
        if backend == "analytic":
            sampler = AnalyticSampler.from_sub_oracle(sub, seed)
        elif backend == "statevector":
            sampler = StatevectorSampler(sub, seed)
        else:
            raise ValueError(f"unknown backend {backend!r}")
    return _estimate(sampler, sub.m, config, seed, sub.node_id)


def run_amplitude(
    amplitude: float,
    config: DiqcConfig,
    seed: int = 0,
    sampler: Union[Sampler, None] = None,
) -> NodeResult:
    """Single-node estimation of a bare amplitude (m = 0, count scale 1)."""
    if sampler is None:
        sampler = AnalyticSampler.from_amplitude(amplitude, seed)
    return _estimate(sampler, 0, config, seed, 0)
