"""Vectorized helpers over the full 2^n state space of a small tree.

States are uint64 bit patterns, bit v = vertex v, matching
Configuration.state_index().  Everything here is O(n * 2^n) numpy work
and is meant for trees of at most ~20 vertices.
"""

from __future__ import annotations

import numpy as np

from .model import ModelParams
from .tree import TreeTopology

ENUMERATION_VERTEX_CAP = 24


def all_states(vertex_count: int) -> np.ndarray:
    if vertex_count > ENUMERATION_VERTEX_CAP:
        raise ValueError(
            f"enumeration over 2^{vertex_count} states refused (cap {ENUMERATION_VERTEX_CAP})"
        )
    return np.arange(1 << vertex_count, dtype=np.uint64)


def bit_of(states: np.ndarray, v: int) -> np.ndarray:
    return ((states >> np.uint64(v)) & np.uint64(1)).astype(np.uint8)


def state_weights(states: np.ndarray, vertex_count: int, p: float) -> np.ndarray:
    """Product-Bernoulli(p) weight of each state."""
    occupied = np.bitwise_count(states).astype(np.int64)
    return p ** occupied * (1.0 - p) ** (vertex_count - occupied)


def constraint_matrix(tree: TreeTopology, params: ModelParams,
                      states: np.ndarray) -> np.ndarray:
    """c_x(state) as a uint8 matrix of shape (vertex_count, n_states)."""
    params.require_compatible(tree)
    n = tree.vertex_count
    out = np.empty((n, states.size), dtype=np.uint8)
    for x in range(n):
        occupied = np.zeros(states.size, dtype=np.int64)
        first = tree.k * x + 1
        for c in range(first, min(first + tree.k, n)):
            occupied += bit_of(states, c)
        out[x] = (tree.k - occupied >= params.j)
    return out


def _occupied_path_matrix(tree: TreeTopology, states: np.ndarray) -> np.ndarray:
    """Row v: indicator that the whole root..v path is occupied."""
    n = tree.vertex_count
    path = np.empty((n, states.size), dtype=np.uint8)
    for v in range(n):
        own = bit_of(states, v)
        path[v] = own if v == 0 else own & path[tree.parent_of[v]]
    return path


def cluster_size_vector(tree: TreeTopology, states: np.ndarray) -> np.ndarray:
    """Root cluster size for every state."""
    return _occupied_path_matrix(tree, states).sum(axis=0, dtype=np.int64)


def cluster_flip_increments(tree: TreeTopology, states: np.ndarray) -> np.ndarray:
    """Per-vertex change of root cluster size under occupying vertex x.

    Row x holds N_r(state with x occupied) - N_r(state with x empty):
    zero unless the path strictly above x is fully occupied, else 1 plus
    the occupied subcluster sizes hanging below x.
    """
    n = tree.vertex_count
    # subcluster[v] = occupied downward cluster size rooted at v
    sub = np.zeros((n, states.size), dtype=np.int64)
    for v in range(n - 1, -1, -1):
        acc = np.ones(states.size, dtype=np.int64)
        first = tree.k * v + 1
        for c in range(first, min(first + tree.k, n)):
            acc += sub[c]
        sub[v] = bit_of(states, v) * acc

    path = _occupied_path_matrix(tree, states)
    out = np.empty((n, states.size), dtype=np.int64)
    for v in range(n):
        above = path[tree.parent_of[v]] if v != 0 else np.ones(states.size, dtype=np.uint8)
        gain = np.ones(states.size, dtype=np.int64)
        first = tree.k * v + 1
        for c in range(first, min(first + tree.k, n)):
            gain += sub[c]
        out[v] = above * gain
    return out
