"""Constrained spin configurations on a rooted tree.

A configuration assigns each vertex 0 (empty) or 1 (occupied).  Vertex x
may refresh its spin only when at least j of its k children are empty;
children outside the finite tree count as empty, which leaves the leaves
permanently unconstrained and makes the finite chain irreducible.

Configurations are immutable and bit-packed: bit v of the integer value
is vertex v's spin, and that integer doubles as the state index used by
the exact solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tree import TreeTopology


@dataclass(frozen=True)
class ModelParams:
    """Equilibrium density p and facilitation threshold j."""

    p: float
    j: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"density p must lie in [0, 1], got {self.p}")
        if self.j < 1:
            raise ValueError(f"facilitation threshold j must be >= 1, got {self.j}")

    def require_compatible(self, tree: TreeTopology) -> None:
        if self.j > tree.k:
            raise ValueError(f"threshold j={self.j} exceeds branching factor k={tree.k}")


class Configuration:
    """Immutable bit-packed spin assignment for a fixed vertex count."""

    __slots__ = ("bits", "vertex_count", "_array")

    def __init__(self, bits: int, vertex_count: int):
        if vertex_count < 1:
            raise ValueError("vertex_count must be >= 1")
        if bits < 0 or bits >> vertex_count:
            raise ValueError("bit pattern has spins outside the vertex range")
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "vertex_count", vertex_count)
        object.__setattr__(self, "_array", None)

    def __setattr__(self, name, value):
        raise AttributeError("Configuration is immutable")

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Configuration":
        arr = np.ascontiguousarray(arr, dtype=np.uint8)
        if arr.ndim != 1:
            raise ValueError("expected a flat 0/1 array")
        if np.any(arr > 1):
            raise ValueError("spins must be 0 or 1")
        # little-endian byte packing so bit v of the int is vertex v
        packed = np.packbits(arr, bitorder="little").tobytes()
        return cls(int.from_bytes(packed, "little"), arr.size)

    @classmethod
    def all_ones(cls, vertex_count: int) -> "Configuration":
        return cls((1 << vertex_count) - 1, vertex_count)

    @classmethod
    def all_zeros(cls, vertex_count: int) -> "Configuration":
        return cls(0, vertex_count)

    def as_array(self) -> np.ndarray:
        """Spins as a read-only uint8 array indexed by vertex id."""
        cached = self._array
        if cached is None:
            nbytes = (self.vertex_count + 7) // 8
            raw = np.frombuffer(self.bits.to_bytes(nbytes, "little"), dtype=np.uint8)
            cached = np.unpackbits(raw, bitorder="little")[: self.vertex_count]
            cached.flags.writeable = False
            object.__setattr__(self, "_array", cached)
        return cached

    def occupancy(self, v: int) -> int:
        if not 0 <= v < self.vertex_count:
            raise ValueError(f"vertex {v} outside [0, {self.vertex_count})")
        return (self.bits >> v) & 1

    def state_index(self) -> int:
        return self.bits

    def occupied_count(self) -> int:
        return int(self.bits).bit_count()

    def to_hex(self) -> str:
        """Lowercase hex of the bit-packed value, LSB = vertex 0."""
        width = (self.vertex_count + 3) // 4
        return format(self.bits, f"0{width}x")

    @classmethod
    def from_hex(cls, text: str, vertex_count: int) -> "Configuration":
        return cls(int(text, 16), vertex_count)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Configuration)
            and self.bits == other.bits
            and self.vertex_count == other.vertex_count
        )

    def __hash__(self) -> int:
        return hash((self.bits, self.vertex_count))

    def __repr__(self) -> str:
        return f"Configuration(0x{self.to_hex()}, n={self.vertex_count})"


def _occupied_child_counts(tree: TreeTopology, arr: np.ndarray) -> np.ndarray:
    """Occupied in-tree children per vertex; out-of-tree children are empty."""
    n = tree.vertex_count
    counts = np.zeros(n, dtype=np.int64)
    ids = np.arange(n, dtype=np.int64)
    for i in range(tree.k):
        child = tree.k * ids + 1 + i
        valid = child < n
        counts[valid] += arr[child[valid]]
    return counts


def constraint_mask(tree: TreeTopology, arr: np.ndarray, params: ModelParams) -> np.ndarray:
    """Vector of c_x over all vertices: 1 where >= j children are empty."""
    params.require_compatible(tree)
    empty = tree.k - _occupied_child_counts(tree, arr)
    return (empty >= params.j).astype(np.uint8)


def constraint(tree: TreeTopology, config: Configuration, x: int, params: ModelParams) -> int:
    """Facilitation indicator at vertex x; never depends on x's own spin."""
    params.require_compatible(tree)
    tree._check_vertex(x)
    if config.vertex_count != tree.vertex_count:
        raise ValueError("configuration size does not match tree")
    bits = config.bits
    occupied = 0
    first = tree.k * x + 1
    for c in range(first, min(first + tree.k, tree.vertex_count)):
        occupied += (bits >> c) & 1
    return 1 if tree.k - occupied >= params.j else 0


def bootstrap_step(tree: TreeTopology, config: Configuration, params: ModelParams) -> Configuration:
    """One synchronous pruning round: occupied unconstrained vertices survive.

    x stays occupied iff it is occupied and its constraint is 0.  The map
    is monotone and can only remove occupation.
    """
    if config.vertex_count != tree.vertex_count:
        raise ValueError("configuration size does not match tree")
    arr = config.as_array()
    blocked = 1 - constraint_mask(tree, arr, params)
    return Configuration.from_array(arr * blocked)


def bootstrap_iterate(tree: TreeTopology, config: Configuration, params: ModelParams,
                      n: int) -> Configuration:
    """n synchronous pruning rounds (fixed point reached early stops the loop)."""
    if n < 0:
        raise ValueError(f"round count must be >= 0, got {n}")
    current = config
    for _ in range(n):
        nxt = bootstrap_step(tree, current, params)
        if nxt == current:
            return current
        current = nxt
    return current


def long_range_constraint(tree: TreeTopology, config: Configuration, x: int, ell: int,
                          params: ModelParams) -> int:
    """Range-ell facilitation: the plain constraint evaluated after ell-1 pruning rounds.

    Identically 1 when x has fewer than ell full levels below it, because
    every vertex with m levels underneath empties within m+1 rounds.
    """
    if ell < 1:
        raise ValueError(f"range must be >= 1, got {ell}")
    pruned = bootstrap_iterate(tree, config, params, ell - 1)
    return constraint(tree, pruned, x, params)


def sample_equilibrium(tree: TreeTopology, p: float, seed) -> Configuration:
    """Draw the product-Bernoulli(p) equilibrium configuration.

    seed may be an int or a numpy Generator; the caller owns RNG state.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"density p must lie in [0, 1], got {p}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    arr = (rng.random(tree.vertex_count) < p).astype(np.uint8)
    return Configuration.from_array(arr)


def cluster_size(tree: TreeTopology, config: Configuration) -> int:
    """Size of the occupied cluster attached to the root (0 if the root is empty)."""
    if config.vertex_count != tree.vertex_count:
        raise ValueError("configuration size does not match tree")
    arr = config.as_array()
    if arr[0] == 0:
        return 0
    total = 0
    frontier = np.array([0], dtype=np.int64)
    while frontier.size:
        total += frontier.size
        first = tree.k * frontier + 1
        kids = (first[:, None] + np.arange(tree.k, dtype=np.int64)[None, :]).ravel()
        kids = kids[kids < tree.vertex_count]
        frontier = kids[arr[kids] == 1]
    return total
