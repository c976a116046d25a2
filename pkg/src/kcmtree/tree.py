"""Rooted k-ary tree topology with breadth-first vertex ids.

Vertices are numbered level by level starting from the root at id 0, so
child i of vertex v is k*v + i + 1 and the parent of v is (v - 1) // k.
All navigation is O(1) arithmetic; the materialized arrays exist for
consumers that want table lookups.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Hard ceiling on materialized vertices: index arithmetic stays in int64
# and parent/depth tables stay within a few hundred MB.
MAX_VERTICES = 1 << 27


@dataclass(frozen=True)
class TreeTopology:
    """Finite rooted k-ary tree of uniform depth.

    depth counts edge levels below the root, so depth 0 is the single
    root vertex and a k=2, depth=2 tree has 7 vertices.
    """

    k: int
    depth: int
    vertex_count: int
    parent_of: np.ndarray = field(repr=False)   # int64, -1 at the root
    depth_of: np.ndarray = field(repr=False)    # int64 per vertex
    level_start: np.ndarray = field(repr=False) # first id of each level, plus end sentinel

    @property
    def root(self) -> int:
        return 0

    def children_of(self, v: int) -> np.ndarray:
        """Ids of v's in-tree children (empty array at the leaves)."""
        self._check_vertex(v)
        first = self.k * v + 1
        last = min(first + self.k, self.vertex_count)
        return np.arange(first, max(first, last), dtype=np.int64)

    def is_leaf(self, v: int) -> bool:
        self._check_vertex(v)
        return self.k * v + 1 >= self.vertex_count

    def level_slice(self, d: int) -> slice:
        """Slice of vertex ids at depth d."""
        if not 0 <= d <= self.depth:
            raise ValueError(f"depth {d} outside [0, {self.depth}]")
        return slice(int(self.level_start[d]), int(self.level_start[d + 1]))

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.vertex_count:
            raise ValueError(f"vertex {v} outside [0, {self.vertex_count})")


def tree_vertex_count(k: int, depth: int) -> int:
    if k == 1:
        return depth + 1
    return (k ** (depth + 1) - 1) // (k - 1)


def build_tree(k: int, depth: int) -> TreeTopology:
    """Construct the complete k-ary tree of the given depth.

    k = 1 degenerates to an oriented chain and is permitted; k = 0 or a
    vertex count beyond MAX_VERTICES is rejected.
    """
    if k < 1:
        raise ValueError(f"branching factor must be >= 1, got {k}")
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    n = tree_vertex_count(k, depth)
    if n > MAX_VERTICES:
        raise ValueError(
            f"tree with k={k}, depth={depth} has {n} vertices, over the {MAX_VERTICES} cap"
        )

    level_sizes = [k ** d if k > 1 else 1 for d in range(depth + 1)]
    level_start = np.zeros(depth + 2, dtype=np.int64)
    np.cumsum(level_sizes, out=level_start[1:])

    ids = np.arange(n, dtype=np.int64)
    parent_of = (ids - 1) // k
    parent_of[0] = -1

    depth_of = np.empty(n, dtype=np.int64)
    for d in range(depth + 1):
        depth_of[level_start[d]:level_start[d + 1]] = d

    for a in (parent_of, depth_of, level_start):
        a.flags.writeable = False
    return TreeTopology(k=k, depth=depth, vertex_count=n,
                        parent_of=parent_of, depth_of=depth_of, level_start=level_start)


def subtree_vertices(tree: TreeTopology, x: int) -> np.ndarray:
    """All descendants of x including x itself, in breadth-first order."""
    tree._check_vertex(x)
    out = [np.array([x], dtype=np.int64)]
    frontier = out[0]
    while True:
        # children of the whole frontier, still sorted because BFS ids are monotone
        first = tree.k * frontier + 1
        kids = (first[:, None] + np.arange(tree.k, dtype=np.int64)[None, :]).ravel()
        kids = kids[kids < tree.vertex_count]
        if kids.size == 0:
            break
        out.append(kids)
        frontier = kids
    return np.concatenate(out)


def vertices_within_levels(tree: TreeTopology, x: int, m: int) -> np.ndarray:
    """Descendants of x at distance 1..m, breadth-first (x itself excluded)."""
    tree._check_vertex(x)
    if m < 0:
        raise ValueError(f"level count must be >= 0, got {m}")
    out = []
    frontier = np.array([x], dtype=np.int64)
    for _ in range(m):
        first = tree.k * frontier + 1
        kids = (first[:, None] + np.arange(tree.k, dtype=np.int64)[None, :]).ravel()
        kids = kids[kids < tree.vertex_count]
        if kids.size == 0:
            break
        out.append(kids)
        frontier = kids
    if not out:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(out)
