"""Hellinger affinity machinery and product-chain mixing lower bounds.

Distributions are plain weight vectors over an explicit finite outcome
set.  The useful chain: Hellinger affinity tensorizes over products, it
sandwiches total variation, and a product of slightly-unmixed factors is
very unmixed, which turns per-factor gap estimates into a mixing-time
lower bound for the product chain.
"""
from __future__ import annotations

import math

import numpy as np

NORMALIZATION_TOL = 1e-12


def check_distribution(weights) -> np.ndarray:
    """Validate and return a probability vector (nonnegative, sums to 1)."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("a distribution is a nonempty 1-D weight vector")
    if np.any(w < 0):
        raise ValueError(f"negative weight {w.min()}")
    total = w.sum()
    if abs(total - 1.0) > NORMALIZATION_TOL * max(1.0, w.size):
        raise ValueError(f"weights sum to {total}, not 1")
    return w


def _paired(pi, nu):
    a = check_distribution(pi)
    b = check_distribution(nu)
    if a.size != b.size:
        raise ValueError(f"mismatched outcome sets: {a.size} vs {b.size}")
    return a, b


def hellinger(pi, nu) -> tuple[float, float]:
    """Affinity sum sqrt(pi*nu) and distance sqrt(2 - 2*affinity)."""
    a, b = _paired(pi, nu)
    affinity = float(np.sqrt(a * b).sum())
    affinity = min(affinity, 1.0)  # guard the sqrt against roundoff
    return affinity, math.sqrt(2.0 - 2.0 * affinity)


def tv_distance(pi, nu) -> float:
    """Total variation distance, half the L1 difference."""
    a, b = _paired(pi, nu)
    return 0.5 * float(np.abs(a - b).sum())


def product_tv_lower_bound(per_factor_tv) -> float:
    """Lower bound on TV between two product measures from per-factor TVs.

    1 - exp(-sum tv_i^2 / 2): each factor's Hellinger affinity is at most
    1 - tv_i^2/2, affinities multiply across factors, and 1 - affinity
    lower-bounds TV.
    """
    tv = np.asarray(per_factor_tv, dtype=np.float64)
    if tv.size == 0:
        raise ValueError("need at least one factor")
    if np.any(tv < 0) or np.any(tv > 1):
        raise ValueError("per-factor TV values must lie in [0, 1]")
    return float(-np.expm1(-0.5 * np.square(tv).sum()))


def product_mixing_threshold(gaps, n: int) -> float:
    """Time t* below which an n-factor product chain cannot have mixed.

    t* = (log(n)/max gap - log(8)/min gap) / 2.  Each factor started from
    its worst state keeps TV at least exp(-gap*t)/2, so at t* the product
    TV lower bound is still order one.  Negative values just mean the
    factor count is too small for the argument to bite.
    """
    lam = np.asarray(gaps, dtype=np.float64)
    if lam.ndim != 1 or lam.size == 0:
        raise ValueError("need a nonempty gap sequence")
    if lam.size != n:
        raise ValueError(f"factor count {n} does not match {lam.size} gaps")
    if np.any(lam <= 0):
        raise ValueError("gaps must be positive")
    return 0.5 * (math.log(n) / lam.max() - math.log(8.0) / lam.min())


def worst_start_index(mode: np.ndarray) -> int:
    """State index maximizing |f| for a slow-mode eigenfunction f.

    Starting the chain there keeps the slow mode's contribution to the
    distance maximal; ties resolve to the first maximizer.
    """
    f = np.asarray(mode, dtype=np.float64)
    if f.ndim != 1 or f.size == 0:
        raise ValueError("mode must be a nonempty 1-D vector")
    return int(np.argmax(np.abs(f)))


def product_distribution(*factors) -> np.ndarray:
    """Outcome-set product of distributions (kron order: first factor slowest)."""
    dists = [check_distribution(f) for f in factors]
    if not dists:
        raise ValueError("need at least one factor")
    out = dists[0]
    for d in dists[1:]:
        out = np.kron(out, d)
    return out
