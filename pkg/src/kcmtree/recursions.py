"""Closed-form recursions for the pruning survival probability and root cluster.

Under the product-Bernoulli(p) measure on the infinite k-ary tree, the
probability that the root survives n synchronous pruning rounds obeys

    q_{n+1} = p * P(Binomial(k, q_n) >= k - j + 1),    q_0 = p,

because the root survives one more round iff it is occupied and at most
j - 1 of its independent child subtrees have died.  The root cluster
mean and variance satisfy one-step recursions in the tree depth.  These
give the density threshold, decay envelopes, and a variational lower
bound on the relaxation time, all without simulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .model import ModelParams
from .tree import TreeTopology, build_tree, tree_vertex_count
from . import statespace

# Iteration budget for limit classification.  Near a tangent fixed point
# the escape time scales like 1/sqrt(p_c - p); 4e5 rounds resolve the
# threshold to ~5e-11, comfortably inside the 1e-10 bisection width.
LIMIT_MAX_ROUNDS = 400_000
DEAD_TOL = 1e-12
ALIVE_TOL = 1e-6


@njit(cache=True)
def _binomial_tail(x: float, k: int, j: int) -> float:
    """P(Binomial(k, x) >= k - j + 1); positive-term sum, no cancellation."""
    total = 0.0
    for m in range(k - j + 1, k + 1):
        coeff = 1.0
        for i in range(m):
            coeff = coeff * (k - i) / (i + 1)
        total += coeff * x ** m * (1.0 - x) ** (k - m)
    return total


@njit(cache=True)
def _survival_step(x: float, p: float, k: int, j: int) -> float:
    if j == k:
        # 1 - (1-x)^k via expm1 keeps relative accuracy for x near 0
        return p * -np.expm1(k * np.log1p(-x))
    return p * _binomial_tail(x, k, j)


@njit(cache=True)
def _survival_values(k: int, j: int, p: float, n_max: int) -> np.ndarray:
    out = np.empty(n_max + 1, dtype=np.float64)
    x = p
    out[0] = x
    for n in range(1, n_max + 1):
        x = _survival_step(x, p, k, j)
        out[n] = x
    return out


@njit(cache=True)
def _survival_limit(k: int, j: int, p: float, max_rounds: int, dead_tol: float):
    x = p
    for n in range(1, max_rounds + 1):
        x = _survival_step(x, p, k, j)
        if x < dead_tol:
            return x, n
    return x, max_rounds


@dataclass(frozen=True)
class RecursionSeries:
    k: int
    j: int
    p: float
    values: np.ndarray  # values[n] = survival probability after n rounds

    def __post_init__(self) -> None:
        self.values.flags.writeable = False


def _check_kjp(k: int, j: int, p: float) -> None:
    if k < 1:
        raise ValueError(f"branching factor must be >= 1, got {k}")
    if not 1 <= j <= k:
        raise ValueError(f"threshold j must lie in [1, {k}], got {j}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"density p must lie in [0, 1], got {p}")


def survival_series(k: int, p: float, n_max: int, j: int | None = None) -> RecursionSeries:
    """Root survival probabilities after 0..n_max pruning rounds."""
    j = k if j is None else j
    _check_kjp(k, j, p)
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    values = _survival_values(k, j, p, n_max)
    return RecursionSeries(k=k, j=j, p=p, values=values)


def survival_limit(k: int, p: float, j: int | None = None,
                   max_rounds: int = LIMIT_MAX_ROUNDS) -> float:
    """Limit of the survival recursion, classified at the iteration budget."""
    j = k if j is None else j
    _check_kjp(k, j, p)
    x, _ = _survival_limit(k, j, p, max_rounds, DEAD_TOL)
    return 0.0 if x < ALIVE_TOL else x


def critical_density(k: int, j: int | None = None, tol: float = 1e-10) -> float:
    """Supremum of densities whose survival recursion collapses to zero.

    For j = k the threshold is exactly 1/k.  For j < k the transition is
    discontinuous and the threshold is located by bisection on the limit
    classifier: a density is dead when the recursion falls below 1e-12
    within the round budget, alive when it holds above 1e-6.
    """
    j = k if j is None else j
    _check_kjp(k, j, 0.5)
    if j == k:
        return 1.0 / k

    def alive(p: float) -> bool:
        x, _ = _survival_limit(k, j, p, LIMIT_MAX_ROUNDS, DEAD_TOL)
        return x > ALIVE_TOL

    lo, hi = 0.0, 1.0  # dead at 0, alive at 1
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if alive(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def survival_bounds(k: int, p: float, n) -> tuple[np.ndarray, np.ndarray]:
    """Decay envelopes for the j = k survival series at or below density 1/k.

    Returns (critical, subcritical) evaluated at round counts n:
    critical[i] = 2 / ((k-1) n_i) holds whenever p <= 1/k, and
    subcritical[i] = p (1 - eps k)^{n_i} with eps = 1/k - p.
    """
    if k < 2:
        raise ValueError(f"envelopes need k >= 2, got {k}")
    if not 0.0 <= p <= 1.0 / k:
        raise ValueError(f"envelopes need p in [0, 1/k]; got p={p} for k={k}")
    n = np.asarray(n, dtype=np.int64)
    if np.any(n < 1):
        raise ValueError("round counts must be >= 1")
    eps = 1.0 / k - p
    critical = 2.0 / ((k - 1) * n.astype(np.float64))
    subcritical = p * (1.0 - eps * k) ** n.astype(np.float64)
    return critical, subcritical


def cluster_mean_series(k: int, p: float, depth: int) -> np.ndarray:
    """Mean root cluster size on trees of depth 0..depth.

    mean[d] = p (k mean[d-1] + 1); at p = 1/k this telescopes to (d+1)/k.
    """
    _check_kjp(k, k, p)
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    out = np.empty(depth + 1, dtype=np.float64)
    out[0] = p
    for d in range(1, depth + 1):
        out[d] = p * (k * out[d - 1] + 1.0)
    return out


def cluster_variance_series(k: int, p: float, depth: int) -> np.ndarray:
    """Variance of the root cluster size on trees of depth 0..depth.

    Conditioning on the root spin splits the variance into the k child
    copies plus the variance of the root indicator times the conditional
    mean, giving var[d] = p k var[d-1] + p(1-p)(k mean[d-1] + 1)^2.  At
    p = 1/k this accumulates p(1-p)(d+1)^2 per level, hence ~ depth^3/3k^2
    growth at the threshold density.
    """
    if p <= 0.0:
        raise ValueError("the variance recursion needs p > 0")
    means = cluster_mean_series(k, p, depth)  # validates inputs
    q = 1.0 - p
    out = np.empty(depth + 1, dtype=np.float64)
    out[0] = p * q
    for d in range(1, depth + 1):
        out[d] = p * k * out[d - 1] + p * q * (k * means[d - 1] + 1.0) ** 2
    return out


# ---------------------------------------------------------------------------
# Variational relaxation-time lower bound from the cluster-size observable.


@dataclass(frozen=True)
class GapBoundResult:
    """Var(N_r)/D(N_r): a certified lower bound on the relaxation time."""

    value: float
    stderr: float
    variance: float
    dirichlet: float
    dirichlet_stderr: float
    method: str


@njit(cache=True)
def _fresh_subcluster(k: int, p: float, n: int, v: int, stack: np.ndarray) -> float:
    """Occupied downward cluster size at v, revealing fresh spins as it descends."""
    cap = stack.shape[0]
    stack[0] = v
    top = 1
    size = 0.0
    while top > 0:
        top -= 1
        w = stack[top]
        size += 1.0
        first = k * w + 1
        for i in range(k):
            c = first + i
            if c < n and np.random.random() < p:
                if top >= cap:
                    return np.nan
                stack[top] = c
                top += 1
    return size


@njit(cache=True)
def _fresh_candidate(k: int, j: int, p: float, n: int, x: int,
                     stack: np.ndarray, kbuf: np.ndarray) -> float:
    """c_x * (flip increment)^2 for a vertex whose children are still unrevealed."""
    first = k * x + 1
    occupied = 0
    for i in range(k):
        c = first + i
        if c < n:
            kbuf[i] = 1 if np.random.random() < p else 0
            occupied += kbuf[i]
        else:
            kbuf[i] = 0
    if k - occupied < j:
        return 0.0
    delta = 1.0
    for i in range(k):
        if kbuf[i] == 1:
            delta += _fresh_subcluster(k, p, n, first + i, stack)
    return delta * delta


@njit(cache=True)
def _dirichlet_mc(k: int, j: int, p: float, n: int, n_samples: int, seed: int,
                  cap: int) -> np.ndarray:
    """Monte Carlo average of sum_x c_x * p(1-p) * (flip increment of N_r)^2.

    Reveals product-Bernoulli(p) spins lazily while exploring the root
    cluster and its boundary, so each sample costs O(explored set) and
    never touches the tree size.  Storage is indexed by cluster-local
    ids; a NaN result marks an exploration larger than cap.
    """
    np.random.seed(seed)
    out = np.empty(n_samples, dtype=np.float64)
    gid = np.empty(cap, dtype=np.int64)            # cluster-local -> vertex id
    child_spin = np.empty(cap * k, dtype=np.uint8)
    child_ci = np.empty(cap * k, dtype=np.int64)   # local id of occupied child
    sub = np.empty(cap, dtype=np.float64)          # subcluster size below local id
    stack = np.empty(cap, dtype=np.int64)
    kbuf = np.empty(k, dtype=np.uint8)
    pq = p * (1.0 - p)

    for s in range(n_samples):
        total = 0.0
        if np.random.random() < p:
            # BFS the occupied root cluster, recording each member's child spins
            gid[0] = 0
            m = 1
            head = 0
            bad = False
            while head < m:
                v = gid[head]
                base = head * k
                first = k * v + 1
                for i in range(k):
                    c = first + i
                    if c < n and np.random.random() < p:
                        if m >= cap:
                            bad = True
                            break
                        child_spin[base + i] = 1
                        child_ci[base + i] = m
                        gid[m] = c
                        m += 1
                    else:
                        child_spin[base + i] = 0
                        child_ci[base + i] = -1
                if bad:
                    break
                head += 1
            if bad:
                out[s] = np.nan
                continue

            # subcluster sizes bottom-up; children sit after parents, so a
            # reverse sweep sees every child before its parent
            for ci in range(m - 1, -1, -1):
                acc = 1.0
                base = ci * k
                for i in range(k):
                    cc = child_ci[base + i]
                    if cc >= 0:
                        acc += sub[cc]
                sub[ci] = acc

            # candidates: cluster members (increment = own subcluster size)
            # and their empty in-tree children (fresh exploration below)
            for ci in range(m):
                base = ci * k
                occupied = 0
                for i in range(k):
                    occupied += child_spin[base + i]
                if k - occupied >= j:
                    total += sub[ci] * sub[ci]
                v = gid[ci]
                first = k * v + 1
                for i in range(k):
                    c = first + i
                    if c < n and child_spin[base + i] == 0:
                        total += _fresh_candidate(k, j, p, n, c, stack, kbuf)
        else:
            # empty root is the only vertex with an occupied path above it
            total += _fresh_candidate(k, j, p, n, 0, stack, kbuf)
        out[s] = pq * total
    return out


def _dirichlet_exact(tree: TreeTopology, params: ModelParams) -> float:
    """Exact D(N_r) by chunked enumeration of the full state space."""
    n = tree.vertex_count
    pq = params.p * (1.0 - params.p)
    chunk_bits = min(n, 18)
    total = 0.0
    for start in range(0, 1 << n, 1 << chunk_bits):
        states = np.arange(start, start + (1 << chunk_bits), dtype=np.uint64)
        weights = statespace.state_weights(states, n, params.p)
        cons = statespace.constraint_matrix(tree, params, states)
        incr = statespace.cluster_flip_increments(tree, states)
        total += pq * float(np.sum(weights * (cons * incr.astype(np.float64) ** 2).sum(axis=0)))
    return total


def cluster_gap_lower_bound(k: int, p: float, depth: int, j: int | None = None,
                            method: str = "auto", n_samples: int = 200_000,
                            seed: int = 0) -> GapBoundResult:
    """Variational relaxation-time lower bound Var(N_r)/D(N_r) at one depth.

    The variance comes from the exact recursion; the Dirichlet form is an
    equilibrium average evaluated by enumeration on small trees or by
    direct product-measure sampling on large ones (no dynamics needed).
    """
    j = k if j is None else j
    _check_kjp(k, j, p)
    if not 0.0 < p < 1.0:
        raise ValueError("the bound needs p strictly inside (0, 1)")
    n = tree_vertex_count(k, depth)
    if method == "auto":
        method = "exact" if n <= 20 else "mc"
    variance = float(cluster_variance_series(k, p, depth)[depth])

    if method == "exact":
        if n > 20:
            raise ValueError(f"exact Dirichlet enumeration refused for {n} > 20 vertices")
        tree = build_tree(k, depth)
        dirichlet = _dirichlet_exact(tree, ModelParams(p=p, j=j))
        d_err = 0.0
    elif method == "mc":
        cap = int(min(n, 1 << 18))
        samples = _dirichlet_mc(k, j, p, n, n_samples, seed, cap)
        if np.isnan(samples).any():
            raise RuntimeError(
                "cluster exploration exceeded its buffer; the density is too "
                "supercritical for the sampling bound at this depth")
        dirichlet = float(samples.mean())
        d_err = float(samples.std(ddof=1) / np.sqrt(n_samples))
    else:
        raise ValueError(f"unknown method {method!r}")

    value = variance / dirichlet
    stderr = value * d_err / dirichlet  # first-order propagation through 1/D
    return GapBoundResult(value=value, stderr=stderr, variance=variance,
                          dirichlet=dirichlet, dirichlet_stderr=d_err, method=method)
