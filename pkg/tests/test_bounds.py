import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kcmtree.bounds import (
    hellinger,
    product_distribution,
    product_mixing_threshold,
    product_tv_lower_bound,
    tv_distance,
    worst_start_index,
)
from kcmtree.model import ModelParams
from kcmtree.spectral import (
    build_generator,
    evolve_distribution,
    slow_mode,
    spectral_gap,
)
from kcmtree.tree import build_tree


def _random_pair(rng, size):
    a = rng.random(size) + 1e-12
    b = rng.random(size) + 1e-12
    return a / a.sum(), b / b.sum()


# ---------------------------------------------------------------------------
# Hellinger affinity and distance


def test_identical_distributions():
    pi = np.array([0.2, 0.3, 0.5])
    affinity, dist = hellinger(pi, pi)
    assert affinity == pytest.approx(1.0, abs=1e-12)
    assert dist == pytest.approx(0.0, abs=1e-7)
    assert tv_distance(pi, pi) == 0.0


def test_disjoint_supports():
    pi = np.array([1.0, 0.0])
    nu = np.array([0.0, 1.0])
    affinity, dist = hellinger(pi, nu)
    assert affinity == 0.0
    assert dist == pytest.approx(math.sqrt(2), abs=1e-12)
    assert tv_distance(pi, nu) == 1.0


def test_bernoulli_half_versus_one():
    pi = np.array([0.5, 0.5])
    nu = np.array([0.0, 1.0])
    affinity, dist = hellinger(pi, nu)
    assert affinity == pytest.approx(math.sqrt(0.5), abs=1e-12)
    assert dist == pytest.approx(math.sqrt(2 - math.sqrt(2)), abs=1e-12)
    tv = tv_distance(pi, nu)
    assert tv == pytest.approx(0.5, abs=1e-12)
    assert 0.5 * dist ** 2 <= tv <= dist


def test_input_validation():
    with pytest.raises(ValueError):
        hellinger(np.array([0.5, 0.6]), np.array([0.5, 0.5]))   # not normalized
    with pytest.raises(ValueError):
        hellinger(np.array([1.0]), np.array([0.5, 0.5]))        # size mismatch
    with pytest.raises(ValueError):
        tv_distance(np.array([-0.1, 1.1]), np.array([0.5, 0.5]))


def test_sandwich_on_random_pairs():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        size = rng.integers(2, 65)
        pi, nu = _random_pair(rng, size)
        _, dist = hellinger(pi, nu)
        tv = tv_distance(pi, nu)
        assert 0.5 * dist ** 2 <= tv + 1e-12
        assert tv <= dist + 1e-12


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=50)
def test_hellinger_tensorizes(seed):
    rng = np.random.default_rng(seed)
    pairs = [_random_pair(rng, int(rng.integers(2, 9))) for _ in range(3)]
    for m in (2, 3):
        joint_pi = product_distribution(*[p for p, _ in pairs[:m]])
        joint_nu = product_distribution(*[n for _, n in pairs[:m]])
        joint_affinity, _ = hellinger(joint_pi, joint_nu)
        factor_product = math.prod(hellinger(p, n)[0] for p, n in pairs[:m])
        assert joint_affinity == pytest.approx(factor_product, abs=1e-10)


def test_product_distribution_indexing():
    a = np.array([0.25, 0.75])
    b = np.array([0.1, 0.9])
    joint = product_distribution(a, b)
    assert joint.sum() == pytest.approx(1.0)
    assert joint[0] == pytest.approx(0.25 * 0.1)     # first factor varies slowest
    assert joint[3] == pytest.approx(0.75 * 0.9)


# ---------------------------------------------------------------------------
# product TV lower bound


def test_bound_zero_for_identical_factors():
    assert product_tv_lower_bound([0.0, 0.0, 0.0]) == 0.0


def test_single_factor_bound_is_conservative():
    for tv in (0.1, 0.5, 0.9, 1.0):
        bound = product_tv_lower_bound([tv])
        assert bound == pytest.approx(1.0 - math.exp(-0.5 * tv ** 2), abs=1e-12)
        assert bound <= tv


def test_bound_rejects_out_of_range():
    with pytest.raises(ValueError):
        product_tv_lower_bound([0.5, 1.2])
    with pytest.raises(ValueError):
        product_tv_lower_bound([-0.01])


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=50)
def test_affinity_chain_inequality(seed):
    """1 - prod I_H >= 1 - prod(1 - TV_i^2 / 2) on random factor pairs."""
    rng = np.random.default_rng(seed)
    pairs = [_random_pair(rng, int(rng.integers(2, 17))) for _ in range(3)]
    affinity_product = math.prod(hellinger(p, n)[0] for p, n in pairs)
    tv_product = math.prod(1.0 - 0.5 * tv_distance(p, n) ** 2 for p, n in pairs)
    assert 1.0 - affinity_product >= 1.0 - tv_product - 1e-12


def test_bound_below_exact_product_tv():
    """Two independent copies of the depth-1 chain from worst starts: the
    closed-form bound never exceeds the exactly computed product TV."""
    gen = build_generator(build_tree(2, 1), ModelParams(p=0.5, j=2))
    mu = gen.stationary
    start = np.zeros(8)
    start[worst_start_index(slow_mode(gen)[1])] = 1.0
    mu_joint = product_distribution(mu, mu)
    for t in (0.5, 2.0, 5.0, 10.0, 20.0):
        nu_t = evolve_distribution(gen, start, t)
        per_factor = tv_distance(nu_t, mu)
        bound = product_tv_lower_bound([per_factor, per_factor])
        exact = tv_distance(product_distribution(nu_t, nu_t), mu_joint)
        assert bound <= exact + 1e-12


# ---------------------------------------------------------------------------
# product-chain mixing threshold


def test_threshold_zero_at_eight_copies():
    assert product_mixing_threshold([2.0] * 8, 8) == pytest.approx(0.0, abs=1e-12)


def test_threshold_equal_gaps_closed_form():
    lam = 0.37
    for n in (2, 64, 1024):
        expected = (math.log(n) - math.log(8)) / (2 * lam)
        assert product_mixing_threshold([lam] * n, n) == pytest.approx(expected, rel=1e-12)


def test_threshold_negative_for_few_copies():
    t_star = product_mixing_threshold([1.0, 1.0], 2)
    assert t_star == pytest.approx(0.5 * (math.log(2) - math.log(8)), abs=1e-12)
    assert t_star < 0


def test_threshold_mixed_gaps_uses_extremes():
    gaps = [0.5, 1.0, 2.0]
    expected = 0.5 * (math.log(3) / 2.0 - math.log(8) / 0.5)
    assert product_mixing_threshold(gaps, 3) == pytest.approx(expected, rel=1e-12)


def test_threshold_validation():
    with pytest.raises(ValueError):
        product_mixing_threshold([1.0, 0.0], 2)
    with pytest.raises(ValueError):
        product_mixing_threshold([1.0], 2)     # count mismatch


@pytest.mark.parametrize("m", [2, 3, 4])
def test_threshold_hook_against_exact_product(m):
    """At max(t*, 0) the exact product TV from per-factor worst starts is
    still at least 1 - 1/e (the threshold marks genuinely unmixed times)."""
    gen = build_generator(build_tree(2, 1), ModelParams(p=0.5, j=2))
    gap = spectral_gap(gen)
    mu = gen.stationary
    start = np.zeros(8)
    start[worst_start_index(slow_mode(gen)[1])] = 1.0
    t_star = product_mixing_threshold([gap] * m, m)
    t_eval = max(t_star, 0.0)
    nu_t = evolve_distribution(gen, start, t_eval)
    exact = tv_distance(product_distribution(*[nu_t] * m),
                        product_distribution(*[mu] * m))
    assert exact >= 1.0 - math.exp(-1.0) - 1e-9


def test_worst_start_index_picks_sup_norm():
    mode = np.array([0.1, -0.9, 0.4])
    assert worst_start_index(mode) == 1
