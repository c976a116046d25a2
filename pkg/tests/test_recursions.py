import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kcmtree.model import Configuration, ModelParams, bootstrap_iterate
from kcmtree.recursions import (
    cluster_gap_lower_bound,
    cluster_mean_series,
    cluster_variance_series,
    critical_density,
    survival_bounds,
    survival_limit,
    survival_series,
)
from kcmtree.spectral import build_generator, spectral_gap
from kcmtree.statespace import all_states, cluster_size_vector
from kcmtree.tree import build_tree


# ---------------------------------------------------------------------------
# survival recursion


def test_survival_first_steps_exact():
    series = survival_series(2, 0.5, 2)
    assert series.values[0] == 0.5
    assert series.values[1] == 0.375
    assert series.values[2] == 39 / 128


def test_survival_matches_enumeration_through_two_rounds():
    """values[n] equals the product-measure weight of surviving n bootstrap
    rounds, enumerated exhaustively on a depth-2 tree (the root's survival
    after n <= 2 rounds only reads the top n+1 levels)."""
    p = 0.5
    tree = build_tree(2, 2)
    params = ModelParams(p=p, j=2)
    series = survival_series(2, p, 2)
    for n in (1, 2):
        total = 0.0
        for bits in range(1 << 7):
            conf = Configuration(bits, 7)
            if bootstrap_iterate(tree, conf, params, n).occupancy(0) == 1:
                occ = bin(bits).count("1")
                total += p ** occ * (1 - p) ** (7 - occ)
        assert total == pytest.approx(series.values[n], abs=1e-12)


def test_survival_zero_density_stays_zero():
    assert np.all(survival_series(3, 0.0, 50).values == 0.0)


def test_survival_partial_facilitation_fixed_point():
    series = survival_series(3, 8 / 9, 10_000, j=2)
    assert abs(series.values[-1] - 0.75) <= 1e-3


@given(st.integers(min_value=2, max_value=5),
       st.floats(min_value=0.01, max_value=0.99))
@settings(max_examples=60)
def test_survival_series_monotone_and_bounded(k, p):
    values = survival_series(k, p, 200).values
    assert np.all(values <= p + 1e-15)
    assert np.all(values >= 0.0)
    assert np.all(np.diff(values) <= 1e-15)


def test_survival_monotone_in_density():
    grid = np.linspace(0.05, 0.95, 19)
    tails = [survival_series(2, p, 300).values[-1] for p in grid]
    assert all(b >= a - 1e-15 for a, b in zip(tails, tails[1:]))


def test_survival_invalid_parameters():
    with pytest.raises(ValueError):
        survival_series(2, 1.5, 10)
    with pytest.raises(ValueError):
        survival_series(2, 0.5, 10, j=3)
    with pytest.raises(ValueError):
        survival_series(0, 0.5, 10)


# ---------------------------------------------------------------------------
# decay envelopes


def test_critical_envelope_value():
    crit, _ = survival_bounds(2, 0.5, np.array([10]))
    assert crit[0] == pytest.approx(0.2, abs=1e-15)


def test_subcritical_envelope_value():
    _, sub = survival_bounds(2, 0.4, np.array([5]))
    assert sub[0] == pytest.approx(0.4 * 0.8 ** 5, abs=1e-15)


def test_envelope_exceeding_one_is_vacuous():
    crit, _ = survival_bounds(3, 1 / 3, np.array([1]))
    p1 = survival_series(3, 1 / 3, 1).values[1]
    assert crit[0] == 1.0 >= p1


def test_envelopes_reject_supercritical_density():
    with pytest.raises(ValueError):
        survival_bounds(2, 0.6, np.array([1]))


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_critical_envelope_dominates_series(k):
    n_max = 3000
    values = survival_series(k, 1.0 / k, n_max).values
    n = np.arange(1, n_max + 1)
    crit, _ = survival_bounds(k, 1.0 / k, n)
    assert np.all(values[1:] <= crit + 1e-15)


@pytest.mark.parametrize("p", [0.40, 0.45, 0.49])
def test_subcritical_envelope_dominates_series(p):
    values = survival_series(2, p, 1000).values
    n = np.arange(1, 1001)
    _, sub = survival_bounds(2, p, n)
    assert np.all(values[1:] <= sub + 1e-15)


# ---------------------------------------------------------------------------
# critical densities


def test_critical_density_full_facilitation():
    assert critical_density(2, 2) == 0.5
    assert critical_density(3, 3) == 1 / 3
    assert critical_density(5) == 0.2


def test_critical_density_partial_facilitation():
    assert critical_density(3, 2) == pytest.approx(8 / 9, abs=1e-9)


def test_survival_limit_brackets_the_jump():
    p_c = 8 / 9
    assert survival_limit(3, p_c - 1e-3, j=2) < 1e-6
    assert survival_limit(3, p_c, j=2) > 0.74


def test_survival_limit_continuous_case():
    assert survival_limit(2, 0.45) == 0.0
    assert survival_limit(2, 0.6) > 0.3


# ---------------------------------------------------------------------------
# cluster statistics


def test_cluster_mean_critical_closed_form():
    means = cluster_mean_series(2, 0.5, 3)
    assert means[3] == pytest.approx(2.0, abs=1e-14)
    for L in range(4):
        assert means[L] == pytest.approx((L + 1) / 2, abs=1e-14)


def test_cluster_mean_examples():
    assert np.all(cluster_mean_series(2, 0.0, 5) == 0.0)
    assert cluster_mean_series(2, 0.4, 2)[2] == pytest.approx(0.976, abs=1e-12)


def test_cluster_variance_critical_values():
    var = cluster_variance_series(2, 0.5, 3)
    assert var.tolist() == pytest.approx([0.25, 1.25, 3.5, 7.5], abs=1e-12)


def test_cluster_variance_degenerate_density():
    assert np.all(cluster_variance_series(3, 1.0, 4) == 0.0)
    with pytest.raises(ValueError):
        cluster_variance_series(2, 0.0, 3)


@given(st.integers(min_value=2, max_value=5), st.integers(min_value=1, max_value=30))
@settings(max_examples=40)
def test_cluster_variance_critical_reduction(k, L):
    """At p = 1/k the depth recursion telescopes to adding p(1-p)(L+1)^2."""
    p = 1.0 / k
    var = cluster_variance_series(k, p, L)
    assert var[L] - var[L - 1] == pytest.approx(p * (1 - p) * (L + 1) ** 2, rel=1e-12)


def _enumeration_moments(k, p, L):
    tree = build_tree(k, L)
    n = tree.vertex_count
    states = all_states(n)
    sizes = cluster_size_vector(tree, states)
    occ = np.zeros(states.size)
    for v in range(n):
        occ += (states >> v) & 1
    weights = p ** occ * (1 - p) ** (n - occ)
    mean = float(weights @ sizes)
    var = float(weights @ (sizes - mean) ** 2)
    return mean, var


@pytest.mark.parametrize("p", [0.3, 0.5, 0.7])
def test_cluster_moments_match_enumeration(p):
    for L in range(4):
        mean, var = _enumeration_moments(2, p, L)
        assert cluster_mean_series(2, p, L)[L] == pytest.approx(mean, abs=1e-10)
        assert cluster_variance_series(2, p, L)[L] == pytest.approx(var, abs=1e-10)


def test_cluster_variance_cubic_growth():
    L = 50
    var = cluster_variance_series(2, 0.5, L)[L]
    coeff = var / L ** 3
    assert abs(coeff - 0.25 / 3) <= 0.25 * (0.25 / 3)


# ---------------------------------------------------------------------------
# variational relaxation-time bound


def test_gap_bound_exact_small_tree():
    result = cluster_gap_lower_bound(2, 0.5, 1, method="exact")
    assert result.variance == pytest.approx(1.25, abs=1e-12)
    # Dirichlet form by hand over the 8 states of the depth-1 tree
    tree = build_tree(2, 1)
    params = ModelParams(p=0.5, j=2)
    states = all_states(3)
    sizes = cluster_size_vector(tree, states)
    d_hand = 0.0
    for s in range(8):
        for x in range(3):
            if x == 0 and (s & 0b110):
                continue    # root blocked unless both children empty
            flipped = sizes[s ^ (1 << x)]
            d_hand += (1 / 8) * 0.25 * (flipped - sizes[s]) ** 2
    assert result.dirichlet == pytest.approx(d_hand, abs=1e-12)
    assert result.value == pytest.approx(result.variance / d_hand, rel=1e-12)


@pytest.mark.parametrize("p", [0.3, 0.5])
def test_gap_bound_below_exact_relaxation_time(p):
    for L in (1, 2, 3):
        bound = cluster_gap_lower_bound(2, p, L, method="exact").value
        gap = spectral_gap(build_generator(build_tree(2, L), ModelParams(p=p, j=2)))
        assert bound <= 1.0 / gap + 1e-9


def test_gap_bound_increases_with_depth():
    values = [cluster_gap_lower_bound(2, 0.5, L, method="exact").value
              for L in (1, 2, 3)]
    assert values[0] < values[1] < values[2]


def test_gap_bound_mc_agrees_with_exact():
    exact = cluster_gap_lower_bound(2, 0.5, 2, method="exact")
    mc = cluster_gap_lower_bound(2, 0.5, 2, method="mc", n_samples=200_000, seed=3)
    assert mc.stderr > 0
    assert abs(mc.value - exact.value) <= 4 * mc.stderr


def test_gap_bound_mc_deterministic_in_seed():
    a = cluster_gap_lower_bound(2, 0.45, 10, method="mc", n_samples=20_000, seed=9)
    b = cluster_gap_lower_bound(2, 0.45, 10, method="mc", n_samples=20_000, seed=9)
    c = cluster_gap_lower_bound(2, 0.45, 10, method="mc", n_samples=20_000, seed=10)
    assert a.value == b.value
    assert a.value != c.value


def test_gap_bound_deep_tree_runs():
    result = cluster_gap_lower_bound(2, 0.45, 40, method="mc",
                                     n_samples=20_000, seed=4)
    assert result.value > 0
    assert result.method == "mc"


def test_gap_bound_refuses_oversized_exact():
    with pytest.raises(ValueError):
        cluster_gap_lower_bound(2, 0.5, 5, method="exact")
