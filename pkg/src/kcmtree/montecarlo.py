"""Event-driven continuous-time Monte Carlo for trees beyond exact reach.

The sampler realizes the uniformized chain: every vertex rings at rate 1,
a ring picks a uniform vertex, and the spin is resampled Bernoulli(p) iff
the constraint holds at that instant.  Rejected rings leave the state
unchanged, which keeps the jump chain exactly distributed as the
continuous-time dynamics.  Between observable samples only the Poisson
event count matters, so the production kernel batches rings per sampling
interval; a separate trace kernel keeps per-event times for debugging.

Relaxation times are estimated from equilibrium autocorrelations.  Any
single observable lower-bounds the true relaxation time, so estimates take
the max over a small observable set and are flagged as lower-bound
flavored.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .model import Configuration, ModelParams, sample_equilibrium
from .recursions import cluster_gap_lower_bound
from .tree import TreeTopology, build_tree

OBSERVABLES = ("cluster_size", "root_occupancy", "occupied_fraction")

SAMPLE_CAP = 10_000_000
MARGINAL_CAP = 12
_POISSON_CHUNK = 1 << 20


def derive_seed(master_seed: int, *parts) -> int:
    """Stable 32-bit stream seed from a master seed and a task path.

    Hash-based so that adding tasks never perturbs sibling streams.
    """
    h = hashlib.sha256()
    h.update(str(int(master_seed)).encode())
    for part in parts:
        h.update(b"/")
        h.update(str(part).encode())
    return int.from_bytes(h.digest()[:4], "little")


# ---------------------------------------------------------------------------
# kernels


@njit(cache=True)
def _poisson_count(lam):
    # chunked so the underlying sampler never sees an extreme mean
    total = 0
    while lam > _POISSON_CHUNK:
        total += np.random.poisson(_POISSON_CHUNK)
        lam -= _POISSON_CHUNK
    if lam > 0.0:
        total += np.random.poisson(lam)
    return total


@njit(cache=True)
def _sweep(k, j, p, n, spins, occ, occupied_total, n_events):
    """Apply n_events rings of the uniformized chain in place."""
    for _ in range(n_events):
        v = np.random.randint(0, n)
        if k - occ[v] >= j:  # vertices past the leaves count as empty
            new = 1 if np.random.random() < p else 0
            old = spins[v]
            if new != old:
                spins[v] = new
                occupied_total += new - old
                if v > 0:
                    occ[(v - 1) // k] += new - old
    return occupied_total


@njit(cache=True)
def _root_cluster(k, n, spins, stack):
    if spins[0] == 0:
        return 0.0
    stack[0] = 0
    top = 1
    size = 0.0
    while top > 0:
        top -= 1
        v = stack[top]
        size += 1.0
        first = k * v + 1
        for i in range(k):
            c = first + i
            if c < n and spins[c] == 1:
                stack[top] = c
                top += 1
    return size


@njit(cache=True)
def _kernel_sample(seed, k, j, p, n, spins, occ, occupied_total,
                   burn_lam, event_lam, out, stack):
    """Burn in, then record the observable rows at each sampling time."""
    np.random.seed(seed)
    occupied_total = _sweep(k, j, p, n, spins, occ, occupied_total,
                            _poisson_count(burn_lam))
    for s in range(out.shape[1]):
        occupied_total = _sweep(k, j, p, n, spins, occ, occupied_total,
                                _poisson_count(event_lam))
        out[0, s] = _root_cluster(k, n, spins, stack)
        out[1, s] = spins[0]
        out[2, s] = occupied_total / n
    return occupied_total


@njit(cache=True)
def _kernel_checkpoint(seed, k, j, p, n, spins, occ, occupied_total,
                       dts, marg, codes):
    """Advance through the dts increments, encoding the marginal spins at each."""
    np.random.seed(seed)
    for i in range(dts.shape[0]):
        occupied_total = _sweep(k, j, p, n, spins, occ, occupied_total,
                                _poisson_count(n * dts[i]))
        code = 0
        for b in range(marg.shape[0]):
            code |= int(spins[marg[b]]) << b
        codes[i] = code
    return occupied_total


@njit(cache=True)
def _kernel_trace(seed, k, j, p, n, spins, occ, occupied_total, horizon,
                  ev_t, ev_v, ev_s):
    """Exponential-clock variant recording every ring; new spin -1 = rejected."""
    np.random.seed(seed)
    cap = ev_t.shape[0]
    t = 0.0
    m = 0
    while m < cap:
        t += np.random.exponential(1.0 / n)
        if t > horizon:
            break
        v = np.random.randint(0, n)
        ev_t[m] = t
        ev_v[m] = v
        if k - occ[v] >= j:
            new = 1 if np.random.random() < p else 0
            ev_s[m] = new
            old = spins[v]
            if new != old:
                spins[v] = new
                occupied_total += new - old
                if v > 0:
                    occ[(v - 1) // k] += new - old
        else:
            ev_s[m] = -1
        m += 1
    return m, t, occupied_total


# ---------------------------------------------------------------------------
# trajectory container


@dataclass(frozen=True)
class TimeSeries:
    """Observable samples on a fixed time grid, plus the run metadata."""

    times: np.ndarray
    samples: dict[str, np.ndarray]
    params: ModelParams
    k: int
    depth: int
    seed: int
    initial: str
    burn_in: float
    sample_interval: float
    horizon: float

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("times must be a nonempty 1-D array")
        if not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)
        for name, vals in self.samples.items():
            v = np.asarray(vals, dtype=np.float64)
            if v.shape != t.shape:
                raise ValueError(f"observable {name!r} has {v.size} samples "
                                 f"for {t.size} timestamps")
            v.setflags(write=False)
            self.samples[name] = v

    @property
    def n_samples(self) -> int:
        return int(self.times.size)

    def observable(self, name: str) -> np.ndarray:
        if name not in self.samples:
            raise KeyError(f"series holds {sorted(self.samples)}, not {name!r}")
        return self.samples[name]


def _resolve_initial(tree: TreeTopology, params: ModelParams, initial, seed: int):
    if isinstance(initial, Configuration):
        if initial.vertex_count != tree.vertex_count:
            raise ValueError("initial configuration does not fit the tree")
        return initial.as_array().copy(), "custom"
    if initial == "equilibrium":
        rng = np.random.default_rng(derive_seed(seed, "equilibrium-init"))
        return sample_equilibrium(tree, params.p, rng).as_array().copy(), "equilibrium"
    if initial == "all-ones":
        return np.ones(tree.vertex_count, dtype=np.uint8), "all-ones"
    if initial == "all-zeros":
        return np.zeros(tree.vertex_count, dtype=np.uint8), "all-zeros"
    raise ValueError(f"unknown initial condition {initial!r}")


def _occupied_children_table(tree: TreeTopology, arr: np.ndarray) -> np.ndarray:
    occ = np.zeros(tree.vertex_count, dtype=np.int32)
    if tree.vertex_count > 1:
        np.add.at(occ, tree.parent_of[1:], arr[1:].astype(np.int32))
    return occ


def simulate(tree: TreeTopology, params: ModelParams, horizon: float, seed: int,
             observables=OBSERVABLES, initial="equilibrium",
             sample_interval: float = 1.0, burn_in: float = 0.0) -> TimeSeries:
    """Run the dynamics and record observables at multiples of sample_interval.

    The returned samples start at burn_in + sample_interval; the burn-in
    stretch is simulated but never recorded.  Fully deterministic given
    (params, seed).
    """
    params.require_compatible(tree)
    for name in observables:
        if name not in OBSERVABLES:
            raise ValueError(f"unknown observable {name!r}; have {OBSERVABLES}")
    if horizon <= 0 or sample_interval <= 0 or burn_in < 0:
        raise ValueError("horizon and sample_interval must be positive, burn_in >= 0")
    n_samples = int(horizon / sample_interval + 1e-9)
    if n_samples < 1:
        raise ValueError("horizon shorter than one sampling interval")
    if n_samples > SAMPLE_CAP:
        raise ValueError(f"{n_samples} samples exceed the {SAMPLE_CAP} cap; "
                         "increase sample_interval")

    arr, initial_label = _resolve_initial(tree, params, initial, seed)
    occ = _occupied_children_table(tree, arr)
    n = tree.vertex_count
    out = np.empty((3, n_samples), dtype=np.float64)
    stack = np.empty(n, dtype=np.int64)
    _kernel_sample(derive_seed(seed, "dynamics"), tree.k, params.j, params.p, n,
                   arr, occ, int(arr.sum()), n * burn_in,
                   n * sample_interval, out, stack)

    rows = dict(zip(OBSERVABLES, out))
    times = burn_in + sample_interval * np.arange(1, n_samples + 1)
    return TimeSeries(times=times,
                      samples={name: rows[name] for name in observables},
                      params=params, k=tree.k, depth=tree.depth, seed=seed,
                      initial=initial_label, burn_in=burn_in,
                      sample_interval=sample_interval, horizon=horizon)


# ---------------------------------------------------------------------------
# event trace (debug instrumentation)


@dataclass(frozen=True)
class EventTrace:
    """Per-ring record of a short run: time, vertex, resampled spin (-1 = ring
    rejected by the constraint).  Meant for replay assertions, not production."""

    times: np.ndarray
    vertices: np.ndarray
    new_spins: np.ndarray
    initial: np.ndarray
    horizon: float
    truncated: bool

    @property
    def n_events(self) -> int:
        return int(self.times.size)


def simulate_trace(tree: TreeTopology, params: ModelParams, horizon: float,
                   seed: int, initial="equilibrium",
                   max_events: int = 1_000_000) -> EventTrace:
    """Exponential-clock run keeping every ring for debug replay."""
    params.require_compatible(tree)
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    arr, _ = _resolve_initial(tree, params, initial, seed)
    start = arr.copy()
    occ = _occupied_children_table(tree, arr)
    n = tree.vertex_count
    ev_t = np.empty(max_events, dtype=np.float64)
    ev_v = np.empty(max_events, dtype=np.int64)
    ev_s = np.empty(max_events, dtype=np.int8)
    m, t_last, _ = _kernel_trace(derive_seed(seed, "dynamics"), tree.k, params.j,
                                 params.p, n, arr, occ, int(arr.sum()),
                                 horizon, ev_t, ev_v, ev_s)
    truncated = m == max_events and t_last <= horizon
    for a in (ev_t, ev_v, ev_s, start):
        a.setflags(write=False)
    return EventTrace(times=ev_t[:m], vertices=ev_v[:m], new_spins=ev_s[:m],
                      initial=start, horizon=horizon, truncated=truncated)


# ---------------------------------------------------------------------------
# replica ensembles and marginal laws


def marginal_counts(tree: TreeTopology, params: ModelParams, start, marginal_set,
                    time_grid, n_replicas: int, seed: int = 0) -> np.ndarray:
    """Histogram of the marginal spin pattern at each grid time over replicas.

    Returns an (n_times, 2^m) integer array; pattern bit b is the spin at
    marginal_set[b].  Each replica runs on its own derived stream.
    """
    params.require_compatible(tree)
    marg = np.asarray(sorted(marginal_set), dtype=np.int64)
    if marg.size == 0 or marg.size > MARGINAL_CAP:
        raise ValueError(f"marginal set must have 1..{MARGINAL_CAP} vertices")
    if np.unique(marg).size != marg.size:
        raise ValueError("marginal set has repeated vertices")
    for v in marg:
        tree._check_vertex(int(v))
    grid = np.asarray(time_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0 or not np.all(np.diff(grid) > 0) or grid[0] < 0:
        raise ValueError("time grid must be increasing and nonnegative")
    if n_replicas < 1:
        raise ValueError("need at least one replica")

    dts = np.diff(np.concatenate(([0.0], grid)))
    n = tree.vertex_count
    counts = np.zeros((grid.size, 1 << marg.size), dtype=np.int64)
    codes = np.empty(grid.size, dtype=np.int64)
    for r in range(n_replicas):
        arr, _ = _resolve_initial(tree, params, start, derive_seed(seed, "replica", r))
        occ = _occupied_children_table(tree, arr)
        _kernel_checkpoint(derive_seed(seed, "replica-dyn", r), tree.k, params.j,
                           params.p, n, arr, occ, int(arr.sum()), dts, marg, codes)
        for i in range(grid.size):
            counts[i, codes[i]] += 1
    return counts


def _product_marginal(p: float, m: int) -> np.ndarray:
    patterns = np.arange(1 << m, dtype=np.int64)
    bits = (patterns[:, None] >> np.arange(m)) & 1
    return np.prod(np.where(bits == 1, p, 1.0 - p), axis=1)


@dataclass(frozen=True)
class TVLowerProfile:
    """TV between the empirical marginal law and its equilibrium marginal.

    Projection can only shrink total variation, so each value lower-bounds
    the full-state TV distance from equilibrium at that time.
    """

    times: np.ndarray
    tv: np.ndarray
    counts: np.ndarray
    marginal: tuple[int, ...]
    n_replicas: int

    def crossing_time(self, level: float = 0.25) -> float:
        """First grid time where the profile drops below level (inf if never)."""
        below = np.nonzero(self.tv < level)[0]
        return float(self.times[below[0]]) if below.size else math.inf


def tv_lower_profile(tree: TreeTopology, params: ModelParams, start, marginal_set,
                     n_replicas: int, time_grid, seed: int = 0) -> TVLowerProfile:
    """Empirical lower-bound curve on TV distance to equilibrium."""
    marg = tuple(sorted(int(v) for v in marginal_set))
    if n_replicas < 100 * (1 << len(marg)):
        raise ValueError(f"{n_replicas} replicas cannot resolve a {len(marg)}-spin "
                         f"marginal; need at least {100 * (1 << len(marg))}")
    counts = marginal_counts(tree, params, start, marg, time_grid, n_replicas, seed)
    empirical = counts / n_replicas
    target = _product_marginal(params.p, len(marg))
    tv = 0.5 * np.abs(empirical - target).sum(axis=1)
    return TVLowerProfile(times=np.asarray(time_grid, dtype=np.float64), tv=tv,
                          counts=counts, marginal=marg, n_replicas=n_replicas)


# ---------------------------------------------------------------------------
# autocorrelation analysis


@dataclass(frozen=True)
class FitPolicy:
    """Window and robustness knobs for the autocorrelation tail fit."""

    rho_min: float = 0.05
    rho_max: float = 0.5
    max_lag: float | None = None    # time units; default horizon/50
    n_blocks: int = 20
    n_bootstrap: int = 256
    min_signal_to_noise: float = 3.0


@dataclass(frozen=True)
class AutocorrEstimate:
    lags: np.ndarray
    rho: np.ndarray
    stderr: np.ndarray
    tau_exp: float
    tau_stderr: float
    n_blocks: int
    fit_window: tuple[float, float] | None
    flags: tuple[str, ...] = ()


def _autocovariance(x: np.ndarray, n_lags: int) -> np.ndarray:
    """Within-segment lagged products of an already-centered segment."""
    n = x.size
    m = 1 << int(math.ceil(math.log2(2 * n)))
    f = np.fft.rfft(x, m)
    acf = np.fft.irfft(f * f.conj(), m)[:n_lags + 1]
    return acf / (n - np.arange(n_lags + 1))


def _block_curves(x: np.ndarray, n_lags: int, n_blocks: int, label: str) -> np.ndarray:
    """Unnormalized per-block autocovariance curves of one sample sequence."""
    block_len = x.size // n_blocks
    if block_len <= n_lags:
        raise ValueError(f"blocks of {block_len} samples cannot reach lag {n_lags}")
    centered = x - x.mean()   # global mean: per-block centering biases the tail
    curves = np.empty((n_blocks, n_lags + 1))
    for b in range(n_blocks):
        curves[b] = _autocovariance(centered[b * block_len:(b + 1) * block_len], n_lags)
    if curves[:, 0].mean() <= 0:
        raise ValueError(f"observable {label!r} is constant over the series")
    return curves


def _curve_statistics(curves: np.ndarray, rng, n_bootstrap: int):
    """Mean curve (normalized to rho[0] = 1) plus block-bootstrap resamples."""
    rho = curves.mean(axis=0)
    rho = rho / rho[0]
    picks = rng.integers(0, curves.shape[0], size=(n_bootstrap, curves.shape[0]))
    boot_curves = curves[picks].mean(axis=1)
    boot_curves = boot_curves / boot_curves[:, :1]
    stderr = boot_curves.std(axis=0, ddof=1)
    return rho, boot_curves, stderr


def _wls_slope(t, y, w):
    sw = w.sum()
    tbar = (w * t).sum() / sw
    ybar = (w * y).sum() / sw
    stt = (w * (t - tbar) ** 2).sum()
    slope = (w * (t - tbar) * (y - ybar)).sum() / stt
    return slope, math.sqrt(1.0 / stt)


def _tail_fit(lags, rho, stderr, boot_curves, policy):
    """WLS fit of log rho on the decay window; returns (tau, tau_err, window, flags).

    The slope error from independent-point WLS understates the truth because
    neighboring lags share data, so the quoted error refits each bootstrap
    mean curve on the same window and takes the spread.
    """
    flags = []
    with np.errstate(invalid="ignore", divide="ignore"):
        mask = ((rho >= policy.rho_min) & (rho <= policy.rho_max) & (lags > 0)
                & (stderr > 0) & (rho / stderr >= policy.min_signal_to_noise))
    if mask.sum() < 2:
        raise ValueError("no usable lags in the autocorrelation fit window; "
                         "extend the horizon or loosen the fit policy")
    t = lags[mask]
    y = np.log(rho[mask])
    w = (rho[mask] / stderr[mask]) ** 2   # delta method: var(log rho) = (err/rho)^2

    r = rho[mask]
    e = stderr[mask]
    jump = np.diff(r) > 3.0 * np.sqrt(e[1:] ** 2 + e[:-1] ** 2)
    if jump.any():
        flags.append("non-monotone-autocorrelation")

    slope, slope_err = _wls_slope(t, y, w)
    if slope >= 0:
        raise ValueError("autocorrelation tail does not decay on the fit window")
    tau = -1.0 / slope
    tau_err = slope_err / slope ** 2

    taus = []
    for bm in boot_curves[:, mask]:
        if np.all(bm > 0):
            b, _ = _wls_slope(t, np.log(bm), w)
            if b < 0:
                taus.append(-1.0 / b)
    if len(taus) >= 32:
        tau_err = float(np.std(taus, ddof=1))
    else:
        flags.append("bootstrap-tau-error-unavailable")
    return tau, tau_err, (float(t[0]), float(t[-1])), tuple(flags)


def autocorrelation(series: TimeSeries, observable: str,
                    max_lag: float | None = None,
                    policy: FitPolicy | None = None) -> AutocorrEstimate:
    """Equilibrium autocorrelation with block-bootstrap error bars.

    The series is cut into n_blocks non-overlapping blocks; the curve is the
    block mean and the per-lag stderr comes from bootstrap resampling of the
    block curves.  Needs 50x the requested lag in data.
    """
    policy = policy or FitPolicy()
    x = series.observable(observable)
    dt = series.sample_interval
    total = x.size * dt
    lag_time = max_lag if max_lag is not None else (policy.max_lag or total / 50.0)
    n_lags = int(lag_time / dt + 1e-9)
    if n_lags < 1:
        raise ValueError("max_lag shorter than the sampling interval")
    if x.size < 50 * n_lags:
        raise ValueError(f"series of {x.size} samples is too short for lag "
                         f"{n_lags}; need at least {50 * n_lags}")

    curves = _block_curves(x, n_lags, policy.n_blocks, observable)
    rng = np.random.default_rng(derive_seed(series.seed, "block-bootstrap", observable))
    rho, boot_curves, stderr = _curve_statistics(curves, rng, policy.n_bootstrap)
    n_blocks = policy.n_blocks
    lags = dt * np.arange(n_lags + 1)
    tau = tau_err = math.nan
    window = None
    flags: tuple[str, ...] = ()
    try:
        tau, tau_err, window, flags = _tail_fit(lags, rho, stderr, boot_curves, policy)
    except ValueError:
        flags = ("tail-fit-unavailable",)
    return AutocorrEstimate(lags=lags, rho=rho, stderr=stderr, tau_exp=tau,
                            tau_stderr=tau_err, n_blocks=n_blocks,
                            fit_window=window, flags=flags)


@dataclass(frozen=True)
class RelaxationEstimate:
    """Tail-rate relaxation time from one series.

    Observable autocorrelations decay no slower than the spectral gap, so
    this is lower-bound flavored: the max over the observable set is the
    reported value and still only bounds the true relaxation time from below.
    """

    value: float
    stderr: float
    observable: str
    window: tuple[float, float]
    by_observable: dict[str, tuple[float, float]]
    flags: tuple[str, ...] = ()
    lower_bound_flavored: bool = True


def estimate_relaxation_time(series: TimeSeries, observable: str | None = None,
                             fit_policy: FitPolicy | None = None) -> RelaxationEstimate:
    """Fit -1/slope of log autocorrelation on the 0.05..0.5 decay window.

    With observable=None every recorded observable is fitted and the max
    taken; single-observable failures are tolerated as long as one fit lands.
    """
    policy = fit_policy or FitPolicy()
    names = list(series.samples) if observable is None else [observable]
    table: dict[str, tuple[float, float]] = {}
    windows: dict[str, tuple[float, float]] = {}
    flags: list[str] = []
    errors = []
    for name in names:
        est = autocorrelation(series, name, policy=policy)
        if math.isnan(est.tau_exp):
            errors.append(f"{name}: no usable fit window")
            continue
        table[name] = (est.tau_exp, est.tau_stderr)
        windows[name] = est.fit_window
        flags.extend(f"{name}:{f}" for f in est.flags)
    if not table:
        raise ValueError("relaxation fit failed for every observable: "
                         + "; ".join(errors))
    best = max(table, key=lambda name: table[name][0])
    value, stderr = table[best]
    return RelaxationEstimate(value=value, stderr=stderr, observable=best,
                              window=windows[best], by_observable=table,
                              flags=tuple(flags))


# ---------------------------------------------------------------------------
# pilot/production relaxation measurement


@dataclass(frozen=True)
class RelaxationMeasurement:
    value: float
    stderr: float
    k: int
    depth: int
    params: ModelParams
    replicas: int
    master_seed: int
    per_replica: tuple[float, ...]
    per_replica_stderr: tuple[float, ...]
    tau_pilot: float
    horizon: float
    burn_in: float
    sample_interval: float
    flags: tuple[str, ...] = ()


_PILOT_POLICY = FitPolicy(rho_min=0.1, rho_max=0.6, min_signal_to_noise=2.0)


def measure_relaxation_time(k: int, depth: int, p: float, j: int | None = None,
                            replicas: int = 3, master_seed: int = 0,
                            horizon_factor: float = 2000.0,
                            burn_in_factor: float = 20.0,
                            samples_per_tau: float = 20.0,
                            tau_guess: float | None = None,
                            fit_policy: FitPolicy | None = None) -> RelaxationMeasurement:
    """Equilibrium relaxation time of one (k, depth, p) point by Monte Carlo.

    A pilot run refines the budget guess (iterated while the estimate keeps
    escaping upward), then each replica runs an independent production
    trajectory; the reported error combines replica scatter with fit errors.
    """
    tree = build_tree(k, depth)
    params = ModelParams(p=p, j=k if j is None else j)
    params.require_compatible(tree)
    flags: list[str] = []

    if tau_guess is None:
        bound = cluster_gap_lower_bound(k, p, depth, j=params.j,
                                        n_samples=50_000,
                                        seed=derive_seed(master_seed, "tau-guess"))
        tau = max(1.0, bound.value)
    else:
        tau = max(1.0, float(tau_guess))

    # pilots with a short window are biased down whenever the budget scale
    # starts too small, so escalate until the estimate stops growing
    for stage in range(5):
        pilot = simulate(tree, params, horizon=120.0 * tau,
                         seed=derive_seed(master_seed, "pilot", stage),
                         initial="equilibrium", sample_interval=tau / 10.0,
                         burn_in=burn_in_factor * tau)
        try:
            est = estimate_relaxation_time(pilot, fit_policy=_PILOT_POLICY)
        except ValueError:
            flags.append(f"pilot-{stage}-fit-failed")
            tau *= 4.0
            continue
        if est.value <= 1.3 * tau:
            tau = max(est.value, 1.0)
            break
        tau = est.value
    else:
        flags.append("pilot-unconverged")
    tau_pilot = tau

    policy = fit_policy or FitPolicy()

    def production(tau_budget):
        horizon = horizon_factor * tau_budget
        burn_in = burn_in_factor * tau_budget
        dt = tau_budget / samples_per_tau
        if horizon / dt > SAMPLE_CAP:
            dt = horizon / SAMPLE_CAP
            flags.append("sample-interval-raised-by-cap")
        runs = [simulate(tree, params, horizon=horizon,
                         seed=derive_seed(master_seed, "production", round_idx, r),
                         initial="equilibrium", sample_interval=dt, burn_in=burn_in)
                for r in range(replicas)]

        # replicas are pooled at the block-curve level: one tail fit per
        # observable on the combined blocks beats averaging noisy per-replica fits
        lag_time = policy.max_lag if policy.max_lag is not None else horizon / 50.0
        n_lags = max(1, int(lag_time / dt + 1e-9))
        lags = dt * np.arange(n_lags + 1)
        table = {}
        for name in OBSERVABLES:
            curves = np.vstack([_block_curves(run.observable(name), n_lags,
                                              policy.n_blocks, name) for run in runs])
            rng = np.random.default_rng(derive_seed(master_seed, "pooled-bootstrap",
                                                    round_idx, name))
            try:
                rho, boot_curves, err_curve = _curve_statistics(curves, rng,
                                                                policy.n_bootstrap)
                tau_obs, tau_err, window, fit_flags = _tail_fit(lags, rho, err_curve,
                                                                boot_curves, policy)
            except ValueError as exc:
                flags.append(f"{name}:{exc}")
                continue
            table[name] = (tau_obs, tau_err)
            flags.extend(f"{name}:{f}" for f in fit_flags)
        if not table:
            raise RuntimeError("relaxation fit failed for every observable; "
                               "flags: " + "; ".join(flags))
        best = max(table, key=lambda name: table[name][0])
        return table[best][0], table[best][1], runs, horizon, burn_in, dt

    round_idx = 0
    value, stderr, runs, horizon, burn_in, dt = production(tau)
    if value > 1.5 * tau:
        # the budget undersized the window; re-run once at the fitted scale
        flags.append("production-resized")
        tau = value
        round_idx = 1
        value, stderr, runs, horizon, burn_in, dt = production(tau)

    per_replica, per_replica_err = [], []
    for run in runs:
        try:
            est = estimate_relaxation_time(run, fit_policy=fit_policy)
            per_replica.append(est.value)
            per_replica_err.append(est.stderr)
        except ValueError:
            per_replica.append(math.nan)
            per_replica_err.append(math.nan)

    return RelaxationMeasurement(value=value, stderr=stderr, k=k, depth=depth,
                                 params=params, replicas=replicas,
                                 master_seed=master_seed,
                                 per_replica=tuple(per_replica),
                                 per_replica_stderr=tuple(per_replica_err),
                                 tau_pilot=tau_pilot, horizon=horizon,
                                 burn_in=burn_in, sample_interval=dt,
                                 flags=tuple(flags))
