"""Inner-product and Hamming-distance estimation on top of the node runs.

Two parties holding bit vectors x and y of length 2^n estimate
(1/2^n) sum x_i y_i or (1/2^n) popcount(x xor y) by counting, striped
across 2^k nodes with the stride partition. The per-node sub-oracles are
the classical shadows of the two-party gate chains (an AND via a doubly
controlled NOT, an XOR via a single one); what travels between the parties
is tracked in a cost ledger rather than simulated as a channel.

Ledger accounting: every state preparation of the inner-product chain
costs one quantum round trip of 2n-2k+3 qubits; the Hamming chain is a
one-way send of n-k+1 qubits per preparation. Each amplification iterate
contains one preparation and one unpreparation, and every shot adds the
initial preparation, so a node's preparation count is its physical
oracle-call counter. Final results return over a classical channel,
modelled as 64 bits per node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from . import metrics
from .diqc import DiqcConfig, NodeResult, run_node
from .oracle import BitVector, hamming_suboracle, inner_product_suboracle

__all__ = [
    "CommunicationLedger",
    "ApplicationResult",
    "estimate_inner_product",
    "estimate_hamming",
    "communication_bound",
    "INNER_PRODUCT",
    "HAMMING",
]

INNER_PRODUCT = "inner"
HAMMING = "hamming"

_CLASSICAL_BITS_PER_NODE = 64


@dataclass(frozen=True)
class CommunicationLedger:
    qubits_per_preparation: int
    preparations: int
    classical_bits: int

    @property
    def total_qubits(self) -> int:
        return self.qubits_per_preparation * self.preparations


@dataclass
class ApplicationResult:
    """Scaled estimate in [0, 1] with its guarantee and transfer costs."""

    estimate: float
    error_bound: float
    confidence: float
    status: str
    n: int
    k: int
    ledger: CommunicationLedger
    per_node: list[NodeResult] = field(default_factory=list)

    @property
    def succeeded(self) -> bool:
        return self.status == "success"

    def to_dict(self, include_nodes: bool = False) -> dict:
        out = {
            "estimate": self.estimate,
            "error_bound": self.error_bound,
            "confidence": self.confidence,
            "status": self.status,
            "n": self.n,
            "k": self.k,
            "ledger": {
                "qubits_per_preparation": self.ledger.qubits_per_preparation,
                "preparations": self.ledger.preparations,
                "total_qubits": self.ledger.total_qubits,
                "classical_bits": self.ledger.classical_bits,
            },
        }
        if include_nodes:
            out["per_node"] = [res.to_dict() for res in self.per_node]
        return out


def _as_bits(v: Union[str, BitVector], what: str) -> list[int]:
    bits = [int(b) for b in v]
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"{what} must contain only 0/1 entries")
    return bits


def _pad_to_power_of_two(bits: list[int]) -> tuple[list[int], int]:
    """Append zeros up to the next power of two; zeros never mark anything."""
    size = len(bits)
    if size < 2:
        raise ValueError("vectors need at least two entries")
    n = max(1, (size - 1).bit_length())
    return bits + [0] * ((1 << n) - size), n


def _run_pair(
    x: Union[str, BitVector],
    y: Union[str, BitVector],
    k: int,
    epsilon: float,
    alpha: float,
    build,
    qubits_per_preparation,
    shots_per_batch: int,
    base_seed: int,
    backend: str,
) -> ApplicationResult:
    if not 0 < epsilon <= 0.01:
        raise ValueError("epsilon must lie in (0, 0.01]")
    if not 0 < alpha < 0.75:
        raise ValueError("alpha must lie in (0, 3/4)")
    x_bits = _as_bits(x, "x")
    y_bits = _as_bits(y, "y")
    if len(x_bits) != len(y_bits):
        raise ValueError(f"vector lengths differ: {len(x_bits)} != {len(y_bits)}")
    x_bits, n = _pad_to_power_of_two(x_bits)
    y_bits, _ = _pad_to_power_of_two(y_bits)
    nodes = 1 << k
    config = DiqcConfig(
        epsilon_node=epsilon / nodes,
        alpha_node=alpha / nodes,
        shots_per_batch=shots_per_batch,
    )
    results = []
    for j in range(nodes):
        sub = build(x_bits, y_bits, k, j)
        results.append(run_node(sub, config, seed=base_seed + j, backend=backend))
    estimate = sum(res.c for res in results) / (1 << n)
    ledger = CommunicationLedger(
        qubits_per_preparation=qubits_per_preparation(n, k),
        preparations=sum(res.oracle_calls_physical for res in results),
        classical_bits=_CLASSICAL_BITS_PER_NODE * nodes,
    )
    return ApplicationResult(
        estimate=estimate,
        error_bound=3 * epsilon / (1 << (k + 1)),
        confidence=1 - 4 * alpha / 3,
        status="success" if all(res.succeeded for res in results) else "failed",
        n=n,
        k=k,
        ledger=ledger,
        per_node=results,
    )


def estimate_inner_product(
    x: Union[str, BitVector],
    y: Union[str, BitVector],
    k: int,
    epsilon: float,
    alpha: float,
    shots_per_batch: int = 1,
    base_seed: int = 0,
    backend: str = "analytic",
) -> ApplicationResult:
    """Estimate (1/2^n) sum x_i y_i from the un-rounded node estimates."""
    return _run_pair(
        x, y, k, epsilon, alpha,
        build=inner_product_suboracle,
        qubits_per_preparation=lambda n, kk: 2 * n - 2 * kk + 3,
        shots_per_batch=shots_per_batch,
        base_seed=base_seed,
        backend=backend,
    )


def estimate_hamming(
    x: Union[str, BitVector],
    y: Union[str, BitVector],
    k: int,
    epsilon: float,
    alpha: float,
    shots_per_batch: int = 1,
    base_seed: int = 0,
    backend: str = "analytic",
) -> ApplicationResult:
    """Estimate the Hamming distance divided by 2^n."""
    return _run_pair(
        x, y, k, epsilon, alpha,
        build=hamming_suboracle,
        qubits_per_preparation=lambda n, kk: n - kk + 1,
        shots_per_batch=shots_per_batch,
        base_seed=base_seed,
        backend=backend,
    )


def communication_bound(
    problem: str, n: int, k: int, epsilon_node: float, alpha_node: float
) -> float:
    """Worst-case total qubits moved between the parties.

    2^k * (4n-4k+6) * M for the inner product (round trips) and
    2^k * (2n-2k+2) * M for the Hamming distance (one-way sends), with M
    the per-node query bound at the given budget.
    """
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n={n}")
    if problem == INNER_PRODUCT:
        per = 4 * n - 4 * k + 6
    elif problem == HAMMING:
        per = 2 * n - 2 * k + 2
    else:
        raise ValueError(f"unknown problem {problem!r}")
    return (1 << k) * per * metrics.query_bound(epsilon_node, alpha_node)
