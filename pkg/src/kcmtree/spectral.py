"""Exact generator, spectrum, and mixing times on small trees.

The continuous-time chain resamples the spin at x from Bernoulli(p) at
rate 1 whenever the facilitation constraint at x holds, so the packed
off-diagonal rates are p for 0->1 flips and 1-p for 1->0 flips at
constrained-open vertices.  The chain is reversible for the product
measure; all spectral work happens on the symmetrization
D^{1/2} (-Q) D^{-1/2}, whose smallest nonzero eigenvalue is the gap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import LinearOperator, eigsh

from . import statespace
from .model import ModelParams
from .tree import TreeTopology

DEFAULT_VERTEX_CAP = 15
DENSE_STATE_CUTOFF = 1 << 10
EXHAUSTIVE_START_CUTOFF = 1 << 7

# Any tree with a leaf admits the unconstrained leaf-spin test function,
# whose Rayleigh quotient is exactly 1, so the gap never exceeds 1 and a
# rank-one shift of 2 safely deflates the constant mode.
_DEFLATION_SHIFT = 2.0


class SparseGenerator:
    """Sparse Markov generator over the 2^n packed states of one tree."""

    def __init__(self, tree: TreeTopology, params: ModelParams, matrix: sp.csr_matrix,
                 stationary: np.ndarray):
        self.tree = tree
        self.params = params
        self.matrix = matrix
        self.stationary = stationary
        self.n_states = matrix.shape[0]
        self.uniformization_rate = float(np.max(-matrix.diagonal()))
        self._sym = None
        self._uniform = None

    def symmetrized(self) -> sp.csr_matrix:
        """D^{1/2} (-Q) D^{-1/2}, exactly symmetrized."""
        if self._sym is None:
            root = np.sqrt(self.stationary)
            A = -self.matrix.multiply(root[:, None]).multiply(1.0 / root[None, :])
            A = (A + A.T) * 0.5
            self._sym = sp.csr_matrix(A)
        return self._sym

    def uniformized(self) -> tuple[float, sp.csr_matrix]:
        """(rate, P) with P = I + Q/rate, a stochastic matrix."""
        if self._uniform is None:
            rate = self.uniformization_rate
            P = sp.identity(self.n_states, format="csr") + self.matrix.multiply(1.0 / rate)
            self._uniform = (rate, sp.csr_matrix(P))
        return self._uniform


def stationary_measure(tree: TreeTopology, p: float) -> np.ndarray:
    """Product-Bernoulli(p) weights over all packed states.

    The degenerate densities 0 and 1 give point masses; the generator
    itself still requires p strictly inside (0, 1).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"density must lie in [0, 1], got {p}")
    states = statespace.all_states(tree.vertex_count)
    return statespace.state_weights(states, tree.vertex_count, p)


def build_generator(tree: TreeTopology, params: ModelParams,
                    vertex_cap: int = DEFAULT_VERTEX_CAP) -> SparseGenerator:
    """Assemble the sparse generator; refuses trees beyond the state cap."""
    params.require_compatible(tree)
    n = tree.vertex_count
    if n > vertex_cap:
        raise ValueError(
            f"exact solve needs 2^{n} states; cap is 2^{vertex_cap} vertices"
        )
    if not 0.0 < params.p < 1.0:
        raise ValueError(f"density must lie strictly in (0, 1), got {params.p}")

    states = statespace.all_states(n)
    n_states = states.size
    p, q = params.p, 1.0 - params.p
    cons = statespace.constraint_matrix(tree, params, states)

    rows, cols, vals = [], [], []
    diag = np.zeros(n_states, dtype=np.float64)
    idx = states.astype(np.int64)
    for x in range(n):
        open_x = cons[x] == 1
        occ = statespace.bit_of(states, x)
        rate = np.where(occ == 1, q, p)[open_x]
        src = idx[open_x]
        dst = src ^ (1 << x)
        rows.append(src)
        cols.append(dst)
        vals.append(rate)
        diag[src] -= rate

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)

    pattern = sp.coo_matrix((np.ones(rows.size), (rows, cols)), shape=(n_states, n_states))
    n_comp, _ = connected_components(pattern.tocsr(), directed=False)
    if n_comp != 1:
        raise RuntimeError(
            f"generator splits into {n_comp} components; constraint logic is broken"
        )

    Q = sp.coo_matrix(
        (np.concatenate([vals, diag]),
         (np.concatenate([rows, idx]), np.concatenate([cols, idx]))),
        shape=(n_states, n_states),
    ).tocsr()
    mu = statespace.state_weights(states, n, params.p)
    return SparseGenerator(tree=tree, params=params, matrix=Q, stationary=mu)


def variance(mu: np.ndarray, f: np.ndarray) -> float:
    mean = float(mu @ f)
    return float(mu @ (f - mean) ** 2)


def dirichlet_form(gen: SparseGenerator, f: np.ndarray) -> float:
    """sum_x mu( c_x * p(1-p) * (f(state with x=1) - f(state with x=0))^2 )."""
    tree, params = gen.tree, gen.params
    states = statespace.all_states(tree.vertex_count)
    cons = statespace.constraint_matrix(tree, params, states)
    mu = gen.stationary
    pq = params.p * (1.0 - params.p)
    total = 0.0
    for x in range(tree.vertex_count):
        bit = np.uint64(1 << x)
        up = (states | bit).astype(np.int64)
        down = (states & ~bit).astype(np.int64)
        jump = f[up] - f[down]
        total += pq * float(np.sum(mu * cons[x] * jump * jump))
    return total


def spectral_gap(gen: SparseGenerator, tol: float = 1e-10) -> float:
    return slow_mode(gen, tol=tol)[0]


def slow_mode(gen: SparseGenerator, tol: float = 1e-10) -> tuple[float, np.ndarray]:
    """Spectral gap and its eigenfunction in generator coordinates.

    Dense solve below 2^10 states; above that, Lanczos on the symmetrized
    matrix with the constant mode deflated by a rank-one shift.
    Eigenfunction is centered (stationary mean 0) and sup-normalized.
    """
    A = gen.symmetrized()
    root = np.sqrt(gen.stationary)
    if gen.n_states <= DENSE_STATE_CUTOFF:
        vals, vecs = scipy.linalg.eigh(A.toarray())
        gap = float(vals[1])
        w = vecs[:, 1]
    else:
        v = root / np.linalg.norm(root)

        def matvec(x):
            return A @ x + _DEFLATION_SHIFT * v * (v @ x)

        op = LinearOperator(shape=A.shape, matvec=matvec, dtype=np.float64)
        gap = None
        for ncv in (64, 160):
            try:
                vals, vecs = eigsh(op, k=1, which="SA", tol=tol,
                                   ncv=min(gen.n_states, ncv), maxiter=20000)
            except Exception:
                continue
            candidate, w = float(vals[0]), vecs[:, 0]
            resid = np.linalg.norm(A @ w + _DEFLATION_SHIFT * v * (v @ w) - candidate * w)
            if resid <= max(1e-8, 1e-6 * candidate):
                gap = candidate
                break
        if gap is None:
            raise RuntimeError("Lanczos failed to converge on the deflated spectrum")

    f = w / root
    f -= float(gen.stationary @ f)
    f /= np.max(np.abs(f))
    return gap, f


def _poisson_weights(lam: float, tol: float) -> np.ndarray:
    """Poisson(lam) pmf truncated once the tail mass drops below tol."""
    terms = [np.exp(-lam)]
    total = terms[0]
    m = 0
    while total < 1.0 - tol:
        m += 1
        terms.append(terms[-1] * lam / m)
        total += terms[-1]
        if m > 100 + 10 * lam:
            break
    return np.asarray(terms)


_UNIFORM_STEP = 128.0  # max rate*dt per uniformization chunk, keeps weights in range


def _evolve(gen: SparseGenerator, mat: np.ndarray, t: float, tol: float,
            transpose: bool) -> np.ndarray:
    """exp(tQ) applied to rows (distributions) or columns (observables)."""
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    if t == 0:
        return mat.copy()
    rate, P = gen.uniformized()
    op = P.T.tocsr() if transpose else P
    n_chunks = max(1, int(np.ceil(rate * t / _UNIFORM_STEP)))
    dt = t / n_chunks
    out = mat.astype(np.float64, copy=True)
    for _ in range(n_chunks):
        weights = _poisson_weights(rate * dt, tol / n_chunks)
        term = out
        acc = weights[0] * term
        for w in weights[1:]:
            term = op @ term
            acc = acc + w * term
        out = acc / weights.sum()
    return out


def evolve_distribution(gen: SparseGenerator, nu: np.ndarray, t: float,
                        tol: float = 1e-10) -> np.ndarray:
    """Distribution(s) after time t, rows = distributions.

    Uniformization with explicit Poisson-tail control: the truncation
    error in total variation is below tol and mass is renormalized, so
    the result is an exact distribution up to that tolerance.
    """
    nu = np.asarray(nu, dtype=np.float64)
    single = nu.ndim == 1
    mat = nu[None, :] if single else nu
    if mat.shape[1] != gen.n_states:
        raise ValueError("distribution length does not match the state count")
    out = _evolve(gen, mat.T, t, tol, transpose=True).T
    return out[0] if single else out


def evolve_observable(gen: SparseGenerator, f: np.ndarray, t: float,
                      tol: float = 1e-10) -> np.ndarray:
    """E_state[f(X_t)] for every start state (the function side of the flow)."""
    f = np.asarray(f, dtype=np.float64)
    return _evolve(gen, f[:, None], t, tol, transpose=False)[:, 0]


@dataclass(frozen=True)
class MixingTimeResult:
    value: float
    a: int
    start_policy: str
    n_starts: int
    gap: float
    rel_tol: float


def _distance(nu_rows: np.ndarray, mu: np.ndarray, a: int) -> float:
    """max over rows of the L^a norm of nu/mu - 1 under mu."""
    diff = nu_rows - mu[None, :]
    if a == 1:
        return float(np.max(np.sum(np.abs(diff), axis=1)))
    return float(np.sqrt(np.max(np.sum(diff * diff / mu[None, :], axis=1))))


def mixing_time_exact(tree: TreeTopology, params: ModelParams, a: int = 1,
                      start_policy: str = "auto", n_random_starts: int = 64,
                      seed: int = 0, rel_tol: float = 1e-4,
                      vertex_cap: int = DEFAULT_VERTEX_CAP) -> MixingTimeResult:
    """First time the worst-start L^a distance to equilibrium drops to 1/4.

    Start states: every state when the space is at most 2^7, otherwise
    the all-occupied state plus seeded random states.  The L^a distance
    from any fixed start is nonincreasing, so a geometric sweep (factor
    1.3) followed by bisection brackets the crossing to rel_tol.
    """
    if a not in (1, 2):
        raise ValueError(f"only a in {{1, 2}} supported, got {a}")
    gen = build_generator(tree, params, vertex_cap=vertex_cap)
    mu = gen.stationary
    n_states = gen.n_states

    if start_policy == "auto":
        start_policy = "all" if n_states <= EXHAUSTIVE_START_CUTOFF else "heuristic"
    if start_policy == "all":
        starts = np.arange(n_states, dtype=np.int64)
    elif start_policy == "heuristic":
        rng = np.random.default_rng(seed)
        pool = min(n_random_starts, n_states)
        picks = rng.choice(n_states, size=pool, replace=False)
        starts = np.unique(np.concatenate([[n_states - 1], picks])).astype(np.int64)
    else:
        raise ValueError(f"unknown start policy {start_policy!r}")

    gap, _ = slow_mode(gen)
    threshold = 0.25
    evolve_tol = 1e-10

    rows0 = np.zeros((starts.size, n_states))
    rows0[np.arange(starts.size), starts] = 1.0
    if _distance(rows0, mu, a) <= threshold:
        return MixingTimeResult(0.0, a, start_policy, starts.size, gap, rel_tol)

    if n_states <= DENSE_STATE_CUTOFF:
        # dense propagator rows:  e^{tQ}[starts] = (U_s e^{-t diag}) W
        A = gen.symmetrized().toarray()
        vals, vecs = scipy.linalg.eigh(A)
        root = np.sqrt(mu)
        U_s = vecs[starts] / root[starts, None]
        W = vecs.T * root[None, :]

        def rows_at(t: float) -> np.ndarray:
            return (U_s * np.exp(-t * vals)[None, :]) @ W

        t_lo, t_hi = 0.0, max(0.05 / gap, 1.0 / gen.uniformization_rate)
        while _distance(rows_at(t_hi), mu, a) > threshold:
            t_lo, t_hi = t_hi, 1.3 * t_hi
            if t_hi > 1e8 / gap:
                raise RuntimeError("mixing search exceeded 1e8 relaxation times")
        while t_hi - t_lo > rel_tol * t_hi:
            mid = 0.5 * (t_lo + t_hi)
            if _distance(rows_at(mid), mu, a) > threshold:
                t_lo = mid
            else:
                t_hi = mid
    else:
        # checkpointed uniformization: keep the rows at t_lo, evolve increments
        t_lo, rows_lo = 0.0, rows0
        step = max(0.05 / gap, 1.0 / gen.uniformization_rate)
        t_hi, rows_hi = t_lo, rows_lo
        while True:
            t_next = t_hi + step
            rows_next = evolve_distribution(gen, rows_hi, t_next - t_hi, tol=evolve_tol)
            if _distance(rows_next, mu, a) <= threshold:
                t_lo, rows_lo = t_hi, rows_hi
                t_hi = t_next
                break
            t_hi, rows_hi = t_next, rows_next
            step *= 1.3
            if t_hi > 1e8 / gap:
                raise RuntimeError("mixing search exceeded 1e8 relaxation times")
        while t_hi - t_lo > rel_tol * t_hi:
            mid = 0.5 * (t_lo + t_hi)
            rows_mid = evolve_distribution(gen, rows_lo, mid - t_lo, tol=evolve_tol)
            if _distance(rows_mid, mu, a) > threshold:
                t_lo, rows_lo = mid, rows_mid
            else:
                t_hi = mid

    return MixingTimeResult(0.5 * (t_lo + t_hi), a, start_policy, starts.size, gap, rel_tol)
