"""Measurement backends for the amplified two-qubit good-state statistics.

State preparation loads a sub-oracle's indicator into a flag qubit over a
uniform superposition of the index register and rotates an auxiliary qubit
into sqrt(1-r)|0> + sqrt(r)|1>. One amplification iterate then composes the
reflection about the prepared state with the reflection about the |11>
pattern of the last two qubits. Measuring those two qubits after `power`
iterates yields outcome 11 with probability

    P[11] = sin^2((2*power + 1) * theta_tilde),
    sin(theta_tilde) = sqrt(r * t_local / 2^m).

The closed-form model evaluates this directly and is the default backend
for the estimation loops; the dense statevector backend implements the
circuit gate by gate and exists to prove the two agree.

Register convention: m index qubits, then the oracle flag qubit, then the
rotation qubit; a basis index reads (x << 2) | (flag << 1) | rot. The
measurement statistics are invariant to the order of the last two qubits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Union

import numpy as np

from .oracle import SubOracle

__all__ = [
    "STATEVECTOR_QUBIT_LIMIT",
    "AmplitudeModel",
    "StateVector",
    "prob11_analytic",
    "prob11_statevector",
    "apply_A",
    "apply_A_dagger",
    "apply_Q",
    "sample_shots",
    "Sampler",
    "AnalyticSampler",
    "StatevectorSampler",
    "ExactSampler",
]

STATEVECTOR_QUBIT_LIMIT = 22

_HALF_PI = math.pi / 2


def _as_generator(rng: Union[int, np.random.Generator]) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class AmplitudeModel:
    """Closed-form model of one node's measurement distribution."""

    m: int
    t_local: int
    r: float = 1.0

    def __post_init__(self) -> None:
        if self.m < 0:
            raise ValueError("register width must be non-negative")
        if not 0 <= self.t_local <= (1 << self.m):
            raise ValueError(f"t_local {self.t_local} outside [0, {1 << self.m}]")
        if not 0 < self.r <= 1:
            raise ValueError("rotation parameter must lie in (0, 1]")

    @property
    def theta(self) -> float:
        """Unrescaled angle, sin(theta) = sqrt(t_local / 2^m)."""
        return math.asin(math.sqrt(self.t_local / (1 << self.m)))

    @property
    def theta_tilde(self) -> float:
        """Rescaled angle, sin = sqrt(r * t_local / 2^m)."""
        return math.asin(math.sqrt(self.r * self.t_local / (1 << self.m)))

    @classmethod
    def from_sub_oracle(cls, sub: SubOracle, r: float = 1.0) -> "AmplitudeModel":
        return cls(m=sub.m, t_local=sub.t_local, r=r)


def prob11_analytic(model: AmplitudeModel, grover_power: int) -> float:
    """P[11] after `grover_power` amplification iterates."""
    if grover_power < 0:
        raise ValueError("grover_power must be non-negative")
    return math.sin((2 * grover_power + 1) * model.theta_tilde) ** 2


class StateVector:
    """Dense complex amplitudes over an (m+2)-qubit register."""

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, num_qubits: int, amplitudes: Union[np.ndarray, None] = None):
        if num_qubits < 2:
            raise ValueError("need at least the two measured qubits")
        if num_qubits > STATEVECTOR_QUBIT_LIMIT:
            raise ValueError(
                f"{num_qubits} qubits exceeds the statevector limit "
                f"({STATEVECTOR_QUBIT_LIMIT})"
            )
        self.num_qubits = num_qubits
        if amplitudes is None:
            amp = np.zeros(1 << num_qubits, dtype=np.complex128)
            amp[0] = 1.0
        else:
            amp = np.asarray(amplitudes, dtype=np.complex128)
            if amp.shape != (1 << num_qubits,):
                raise ValueError("amplitude vector has the wrong length")
        self.amplitudes = amp

    @classmethod
    def zero(cls, num_qubits: int) -> "StateVector":
        return cls(num_qubits)

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def prob_last_two(self, pattern: int) -> float:
        """Probability of measuring (flag, rot) = the given 2-bit pattern."""
        if not 0 <= pattern < 4:
            raise ValueError("pattern must be a 2-bit value")
        block = self.amplitudes[pattern::4]
        return float(np.vdot(block, block).real)

    def prob11(self) -> float:
        return self.prob_last_two(0b11)


def _hadamard_index_register(amp: np.ndarray, m: int) -> None:
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for bit in range(m):
        v = amp.reshape(1 << (m - 1 - bit), 2, 1 << (bit + 2))
        lo = v[:, 0, :].copy()
        hi = v[:, 1, :]
        v[:, 0, :] = (lo + hi) * inv_sqrt2
        v[:, 1, :] = (lo - hi) * inv_sqrt2


def _oracle_flag(amp: np.ndarray, marked_rows: np.ndarray) -> None:
    # X on the flag qubit, controlled on the index being marked.
    if marked_rows.size == 0:
        return
    for rot in (0, 1):
        a = (marked_rows << 2) | rot
        b = a | 2
        amp[a], amp[b] = amp[b].copy(), amp[a].copy()


def _rotate_q0(amp: np.ndarray, r: float, dagger: bool = False) -> None:
    c = math.sqrt(1.0 - r)
    s = math.sqrt(r)
    if dagger:
        s = -s
    v = amp.reshape(-1, 2)
    lo = v[:, 0].copy()
    hi = v[:, 1].copy()
    v[:, 0] = c * lo - s * hi
    v[:, 1] = s * lo + c * hi


def _reflect_zero(amp: np.ndarray) -> None:
    amp[0] = -amp[0]


def _reflect_good(amp: np.ndarray) -> None:
    amp[3::4] = -amp[3::4]


def _marked_rows(sub: SubOracle) -> np.ndarray:
    return np.fromiter(sub.marked_local, dtype=np.int64, count=sub.t_local)


def _check_width(state: StateVector, sub: SubOracle) -> None:
    if state.num_qubits != sub.m + 2:
        raise ValueError(
            f"state has {state.num_qubits} qubits, sub-oracle needs {sub.m + 2}"
        )


def _check_r(r: float) -> None:
    if not 0 < r <= 1:
        raise ValueError("rotation parameter must lie in (0, 1]")


def apply_A(state: StateVector, sub: SubOracle, r: float) -> StateVector:
    """Hadamards on the index register, oracle into the flag, rotation on q0."""
    _check_width(state, sub)
    _check_r(r)
    amp = state.amplitudes
    _hadamard_index_register(amp, sub.m)
    _oracle_flag(amp, _marked_rows(sub))
    _rotate_q0(amp, r)
    return state


def apply_A_dagger(state: StateVector, sub: SubOracle, r: float) -> StateVector:
    _check_width(state, sub)
    _check_r(r)
    amp = state.amplitudes
    _rotate_q0(amp, r, dagger=True)
    _oracle_flag(amp, _marked_rows(sub))
    _hadamard_index_register(amp, sub.m)
    return state


def apply_Q(state: StateVector, sub: SubOracle, r: float) -> StateVector:
    """One amplification iterate: -(prep) U_0 (prep)^dagger U_11."""
    _check_width(state, sub)
    _check_r(r)
    _reflect_good(state.amplitudes)
    apply_A_dagger(state, sub, r)
    _reflect_zero(state.amplitudes)
    apply_A(state, sub, r)
    np.negative(state.amplitudes, out=state.amplitudes)
    return state


def prob11_statevector(sub: SubOracle, r: float, grover_power: int) -> float:
    """P[11] of the circuit backend after `grover_power` iterates."""
    if grover_power < 0:
        raise ValueError("grover_power must be non-negative")
    state = StateVector.zero(sub.m + 2)
    apply_A(state, sub, r)
    for _ in range(grover_power):
        apply_Q(state, sub, r)
    return state.prob11()


def sample_shots(probability: float, shots: int, rng: Union[int, np.random.Generator]) -> int:
    """Count of good outcomes in `shots` Bernoulli trials; seed-deterministic."""
    if not 0.0 <= probability <= 1.0:
        raise ValueError(f"probability {probability} outside [0, 1]")
    if shots < 1:
        raise ValueError("shots must be positive")
    return int(_as_generator(rng).binomial(shots, probability))


class Sampler(Protocol):
    """Measurement source: good-outcome counts for (power, r, shots)."""

    def probability(self, grover_power: int, r: float) -> float: ...

    def sample(self, grover_power: int, r: float, shots: int) -> int: ...


class AnalyticSampler:
    """Draws from the closed-form distribution of a fixed unrescaled angle."""

    def __init__(self, theta: float, rng: Union[int, np.random.Generator] = 0):
        if not 0 <= theta <= _HALF_PI:
            raise ValueError("theta must lie in [0, pi/2]")
        self.theta = theta
        self._sin_theta = math.sin(theta)
        self.rng = _as_generator(rng)

    @classmethod
    def from_amplitude(cls, amplitude: float, rng: Union[int, np.random.Generator] = 0):
        if not 0 <= amplitude <= 1:
            raise ValueError("amplitude must lie in [0, 1]")
        return cls(math.asin(math.sqrt(amplitude)), rng)

    @classmethod
    def from_sub_oracle(cls, sub: SubOracle, rng: Union[int, np.random.Generator] = 0):
        return cls(AmplitudeModel.from_sub_oracle(sub).theta, rng)

    def probability(self, grover_power: int, r: float) -> float:
        _check_r(r)
        theta_tilde = math.asin(math.sqrt(r) * self._sin_theta)
        return math.sin((2 * grover_power + 1) * theta_tilde) ** 2

    def sample(self, grover_power: int, r: float, shots: int) -> int:
        return sample_shots(self.probability(grover_power, r), shots, self.rng)


class StatevectorSampler:
    """Draws from the exact-circuit distribution of a sub-oracle."""

    def __init__(self, sub: SubOracle, rng: Union[int, np.random.Generator] = 0):
        self.sub = sub
        self.rng = _as_generator(rng)
        self._cache: dict[tuple[int, float], float] = {}

    def probability(self, grover_power: int, r: float) -> float:
        key = (grover_power, r)
        p = self._cache.get(key)
        if p is None:
            p = prob11_statevector(self.sub, r, grover_power)
            self._cache[key] = p
        return p

    def sample(self, grover_power: int, r: float, shots: int) -> int:
        return sample_shots(self.probability(grover_power, r), shots, self.rng)


class ExactSampler:
    """Noise-free sampler returning round(p * shots); test plumbing."""

    def __init__(self, theta: float):
        if not 0 <= theta <= _HALF_PI:
            raise ValueError("theta must lie in [0, pi/2]")
        self._sin_theta = math.sin(theta)

    @classmethod
    def from_amplitude(cls, amplitude: float):
        return cls(math.asin(math.sqrt(amplitude)))

    def probability(self, grover_power: int, r: float) -> float:
        theta_tilde = math.asin(math.sqrt(r) * self._sin_theta)
        return math.sin((2 * grover_power + 1) * theta_tilde) ** 2

    def sample(self, grover_power: int, r: float, shots: int) -> int:
        return round(self.probability(grover_power, r) * shots)
