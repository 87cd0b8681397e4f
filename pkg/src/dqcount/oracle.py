"""Marked-set oracles and their per-node decompositions.

A counting problem is specified by an n-qubit index register and a set of
marked indices. Each of 2^k virtual nodes works on an (n-k)-bit slice of the
index space, obtained either by fixing a k-bit prefix (node j owns the
indices whose top k bits equal j) or by striding (node j owns the indices
congruent to j mod 2^k, so local index i maps to 2^k * i + j).

Oracles are plain integer sets; the quantum oracle is realised from this
truth table by the statevector backend.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

__all__ = [
    "OracleSpec",
    "SubOracle",
    "make_oracle",
    "oracle_for_universe",
    "indicator",
    "decompose_prefix",
    "decompose_stride",
    "inner_product_suboracle",
    "hamming_suboracle",
    "load_marked_set",
    "load_bit_vector",
]

PREFIX = "prefix"
STRIDE = "stride"

BitVector = Sequence[int]


def _check_members(marked: Iterable[int], size: int, what: str) -> None:
    bad = sorted(x for x in marked if not 0 <= x < size)
    if bad:
        raise ValueError(f"{what} elements outside [0, {size}): {bad[:5]}")


@dataclass(frozen=True)
class OracleSpec:
    """A marked subset of the n-bit index space."""

    n: int
    marked: frozenset[int]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("index register needs at least one qubit")
        object.__setattr__(self, "marked", frozenset(self.marked))
        _check_members(self.marked, 1 << self.n, "marked")

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def t(self) -> int:
        """Ground-truth number of marked elements."""
        return len(self.marked)

    def indicator(self, x: int) -> int:
        if not 0 <= x < self.size:
            raise ValueError(f"index {x} outside [0, {self.size})")
        return 1 if x in self.marked else 0


@dataclass(frozen=True)
class SubOracle:
    """The restriction of a marked set to one node's m-bit index slice.

    `k` is the log2 node count of the decomposition that produced this
    sub-oracle; it is carried along so local indices can be lifted back to
    the parent index space.
    """

    m: int
    node_id: int
    k: int
    scheme: str
    marked_local: frozenset[int]

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("sub-register needs at least one qubit")
        if self.scheme not in (PREFIX, STRIDE):
            raise ValueError(f"unknown partition scheme {self.scheme!r}")
        if self.k < 1:
            raise ValueError("node count exponent k must be >= 1")
        if not 0 <= self.node_id < (1 << self.k):
            raise ValueError(f"node_id {self.node_id} outside [0, {1 << self.k})")
        object.__setattr__(self, "marked_local", frozenset(self.marked_local))
        _check_members(self.marked_local, 1 << self.m, "marked_local")

    @property
    def size(self) -> int:
        return 1 << self.m

    @property
    def t_local(self) -> int:
        return len(self.marked_local)

    @property
    def amplitude(self) -> float:
        """Fraction of the slice that is marked, t_local / 2^m."""
        return self.t_local / self.size

    def indicator(self, x: int) -> int:
        if not 0 <= x < self.size:
            raise ValueError(f"index {x} outside [0, {self.size})")
        return 1 if x in self.marked_local else 0

    def lift(self, local: int) -> int:
        """Map a local index back into the parent n-bit index space."""
        if not 0 <= local < self.size:
            raise ValueError(f"index {local} outside [0, {self.size})")
        if self.scheme == PREFIX:
            return (self.node_id << self.m) | local
        return (local << self.k) | self.node_id

    def lifted(self) -> frozenset[int]:
        return frozenset(self.lift(x) for x in self.marked_local)


def make_oracle(n: int, marked: Iterable[int]) -> OracleSpec:
    """Build a validated oracle over the n-bit index space."""
    return OracleSpec(n=n, marked=frozenset(marked))


def oracle_for_universe(size: int, marked: Iterable[int]) -> OracleSpec:
    """Build an oracle for a universe of `size` elements.

    A size that is not a power of two is rounded up to the next one by
    appending never-marked padding indices, which leaves the count intact.
    """
    if size < 1:
        raise ValueError("universe must contain at least one element")
    marked = frozenset(marked)
    _check_members(marked, size, "marked")
    n = max(1, (size - 1).bit_length())
    return OracleSpec(n=n, marked=marked)


def indicator(oracle: Union[OracleSpec, SubOracle], x: int) -> int:
    """1 iff `x` is marked in `oracle`; raises if x is out of range."""
    return oracle.indicator(x)


def _split(oracle: OracleSpec, k: int) -> int:
    if not 1 <= k < oracle.n:
        raise ValueError(f"k must satisfy 1 <= k < n={oracle.n}, got {k}")
    return oracle.n - k


def decompose_prefix(oracle: OracleSpec, k: int) -> list[SubOracle]:
    """Split by the top k index bits: node j holds {i | (j << m) | i marked}."""
    m = _split(oracle, k)
    buckets: list[set[int]] = [set() for _ in range(1 << k)]
    mask = (1 << m) - 1
    for x in oracle.marked:
        buckets[x >> m].add(x & mask)
    return [
        SubOracle(m=m, node_id=j, k=k, scheme=PREFIX, marked_local=frozenset(b))
        for j, b in enumerate(buckets)
    ]


def decompose_stride(oracle: OracleSpec, k: int) -> list[SubOracle]:
    """Split by the bottom k index bits: node j holds {i | 2^k * i + j marked}."""
    m = _split(oracle, k)
    buckets: list[set[int]] = [set() for _ in range(1 << k)]
    mask = (1 << k) - 1
    for x in oracle.marked:
        buckets[x & mask].add(x >> k)
    return [
        SubOracle(m=m, node_id=j, k=k, scheme=STRIDE, marked_local=frozenset(b))
        for j, b in enumerate(buckets)
    ]


def _check_bits(bits: BitVector, what: str) -> None:
    bad = [b for b in bits if b not in (0, 1)]
    if bad:
        raise ValueError(f"{what} must contain only 0/1 entries")


def _paired_suboracle(
    x: BitVector, y: BitVector, k: int, node_id: int, keep
) -> SubOracle:
    if len(x) != len(y):
        raise ValueError(f"vector lengths differ: {len(x)} != {len(y)}")
    size = len(x)
    if size < 2 or size & (size - 1):
        raise ValueError(f"vector length {size} is not a power of two >= 2")
    _check_bits(x, "x")
    _check_bits(y, "y")
    n = size.bit_length() - 1
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n={n}, got {k}")
    if not 0 <= node_id < (1 << k):
        raise ValueError(f"node_id {node_id} outside [0, {1 << k})")
    m = n - k
    marked = frozenset(
        i for i in range(1 << m) if keep(x[(i << k) | node_id], y[(i << k) | node_id])
    )
    return SubOracle(m=m, node_id=node_id, k=k, scheme=STRIDE, marked_local=marked)


def inner_product_suboracle(x: BitVector, y: BitVector, k: int, node_id: int) -> SubOracle:
    """Marked local indices i with x_g AND y_g = 1 for g = 2^k * i + node_id."""
    return _paired_suboracle(x, y, k, node_id, lambda a, b: a & b == 1)


def hamming_suboracle(x: BitVector, y: BitVector, k: int, node_id: int) -> SubOracle:
    """Marked local indices i with x_g XOR y_g = 1 for g = 2^k * i + node_id."""
    return _paired_suboracle(x, y, k, node_id, lambda a, b: a ^ b == 1)


def load_marked_set(path: Union[str, os.PathLike]) -> tuple[frozenset[int], Union[int, None]]:
    """Read a marked set from a text file, one element per line.

    Lines may be decimal integers or 0/1 bit strings. If every non-empty
    line consists solely of 0/1 characters and all lines share a common
    length of at least two, the lines are read as bit strings and that
    common width is returned; otherwise lines are read as integers and the
    width is None. Blank lines and '#' comments are ignored.
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        return frozenset(), None
    binary = all(set(ln) <= {"0", "1"} for ln in lines)
    widths = {len(ln) for ln in lines}
    if binary and len(widths) == 1 and (width := widths.pop()) >= 2:
        return frozenset(int(ln, 2) for ln in lines), width
    try:
        return frozenset(int(ln) for ln in lines), None
    except ValueError as exc:
        raise ValueError(f"cannot parse marked-set file {path}: {exc}") from None


def load_bit_vector(path: Union[str, os.PathLike]) -> list[int]:
    """Read a bit vector stored as a single 0/1 string (whitespace ignored)."""
    with open(path, "r", encoding="ascii") as fh:
        text = "".join(fh.read().split())
    if not text or set(text) - {"0", "1"}:
        raise ValueError(f"bit-vector file {path} must be a non-empty 0/1 string")
    return [int(c) for c in text]
