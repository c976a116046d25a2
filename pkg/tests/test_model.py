import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kcmtree.model import (
    Configuration,
    ModelParams,
    bootstrap_iterate,
    bootstrap_step,
    cluster_size,
    constraint,
    constraint_mask,
    long_range_constraint,
    sample_equilibrium,
)
from kcmtree.recursions import survival_series
from kcmtree.tree import build_tree

P_HALF = ModelParams(p=0.5, j=2)


def _config(tree, bits):
    return Configuration(bits, tree.vertex_count)


# ---------------------------------------------------------------------------
# parameters and configurations


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(p=-0.1, j=2)
    with pytest.raises(ValueError):
        ModelParams(p=1.5, j=2)
    with pytest.raises(ValueError):
        ModelParams(p=0.5, j=0)


def test_params_tree_compatibility():
    tree = build_tree(2, 1)
    ModelParams(p=0.5, j=2).require_compatible(tree)
    with pytest.raises(ValueError):
        ModelParams(p=0.5, j=3).require_compatible(tree)  # j > k


def test_configuration_round_trips():
    tree = build_tree(2, 2)
    conf = _config(tree, 0b1010011)
    arr = conf.as_array()
    assert arr.tolist() == [1, 1, 0, 0, 1, 0, 1]
    assert Configuration.from_array(arr) == conf
    assert conf.state_index() == 0b1010011
    assert Configuration.from_hex(conf.to_hex(), 7) == conf
    assert conf.occupied_count() == 4
    assert conf.occupancy(0) == 1 and conf.occupancy(2) == 0


def test_configuration_hex_is_lowercase_lsb_first():
    conf = Configuration(0xAB, 8)
    assert conf.to_hex() == "ab"
    assert conf.occupancy(0) == 1  # LSB is vertex 0


def test_all_ones_all_zeros():
    assert Configuration.all_ones(5).occupied_count() == 5
    assert Configuration.all_zeros(5).occupied_count() == 0


# ---------------------------------------------------------------------------
# the facilitation constraint


def test_leaf_always_unconstrained():
    tree = build_tree(2, 2)
    for conf_bits in (0, 0b1111111, 0b1010101):
        conf = _config(tree, conf_bits)
        for leaf in range(3, 7):
            assert constraint(tree, conf, leaf, P_HALF) == 1


def test_root_constraint_counts_empty_children():
    tree = build_tree(2, 1)
    both_empty = _config(tree, 0b001)
    one_occupied = _config(tree, 0b011)
    assert constraint(tree, both_empty, 0, P_HALF) == 1
    assert constraint(tree, one_occupied, 0, P_HALF) == 0


def test_partial_facilitation_threshold():
    tree = build_tree(3, 1)
    params = ModelParams(p=0.5, j=2)        # two empty children suffice
    two_empty = Configuration.from_array(np.array([1, 1, 0, 0], dtype=np.uint8))
    one_empty = Configuration.from_array(np.array([1, 1, 1, 0], dtype=np.uint8))
    assert constraint(tree, two_empty, 0, params) == 1
    assert constraint(tree, one_empty, 0, params) == 0


@given(st.integers(min_value=0, max_value=127), st.integers(min_value=0, max_value=6))
def test_constraint_ignores_own_spin(bits, x):
    tree = build_tree(2, 2)
    conf = _config(tree, bits)
    flipped = _config(tree, bits ^ (1 << x))
    assert (constraint(tree, conf, x, P_HALF)
            == constraint(tree, flipped, x, P_HALF))


@given(st.integers(min_value=0, max_value=127))
def test_constraint_mask_matches_scalar(bits):
    tree = build_tree(2, 2)
    conf = _config(tree, bits)
    mask = constraint_mask(tree, conf.as_array(), P_HALF)
    for x in range(7):
        assert mask[x] == constraint(tree, conf, x, P_HALF)


def test_invalid_vertex_rejected():
    tree = build_tree(2, 1)
    with pytest.raises(ValueError):
        constraint(tree, _config(tree, 0), 3, P_HALF)


# ---------------------------------------------------------------------------
# bootstrap map


def test_bootstrap_fixes_empty_configuration():
    tree = build_tree(2, 2)
    zero = Configuration.all_zeros(7)
    assert bootstrap_step(tree, zero, P_HALF) == zero


def test_bootstrap_unblocked_root_empties():
    tree = build_tree(2, 1)
    conf = _config(tree, 0b001)     # root occupied, leaves empty
    assert bootstrap_step(tree, conf, P_HALF) == Configuration.all_zeros(3)


def test_bootstrap_peels_levels():
    tree = build_tree(2, 2)
    full = Configuration.all_ones(7)
    once = bootstrap_step(tree, full, P_HALF)
    assert once.as_array().tolist() == [1, 1, 1, 0, 0, 0, 0]
    assert bootstrap_iterate(tree, full, P_HALF, 3) == Configuration.all_zeros(7)
    assert bootstrap_iterate(tree, full, P_HALF, 2) != Configuration.all_zeros(7)


def test_bootstrap_iterate_identity_at_zero():
    tree = build_tree(2, 2)
    conf = _config(tree, 0b0110101)
    assert bootstrap_iterate(tree, conf, P_HALF, 0) == conf


@given(st.integers(min_value=0, max_value=127))
def test_bootstrap_never_creates_particles(bits):
    tree = build_tree(2, 2)
    conf = _config(tree, bits)
    out = bootstrap_step(tree, conf, P_HALF)
    assert np.all(out.as_array() <= conf.as_array())


@given(st.integers(min_value=0, max_value=127), st.integers(min_value=0, max_value=127))
def test_bootstrap_monotone(bits_a, bits_b):
    tree = build_tree(2, 2)
    lower = _config(tree, bits_a & bits_b)
    upper = _config(tree, bits_a | bits_b)
    out_lo = bootstrap_step(tree, lower, P_HALF).as_array()
    out_hi = bootstrap_step(tree, upper, P_HALF).as_array()
    assert np.all(out_lo <= out_hi)


# ---------------------------------------------------------------------------
# long-range constraint


@given(st.integers(min_value=0, max_value=127), st.integers(min_value=0, max_value=6))
def test_long_range_level_one_is_plain_constraint(bits, x):
    tree = build_tree(2, 2)
    conf = _config(tree, bits)
    assert (long_range_constraint(tree, conf, x, 1, P_HALF)
            == constraint(tree, conf, x, P_HALF))


def test_long_range_trivial_when_range_exceeds_depth_below():
    tree = build_tree(2, 2)
    full = Configuration.all_ones(7)
    # level-1 vertices have one level below: range 2 sticks out, constraint free
    assert long_range_constraint(tree, full, 1, 2, P_HALF) == 1
    assert long_range_constraint(tree, full, 0, 3, P_HALF) == 1


def test_long_range_sees_through_occupied_children():
    tree = build_tree(2, 2)
    # both root children occupied, all grandchildren empty: one bootstrap
    # step clears the children, so the range-2 constraint opens
    conf = Configuration.from_array(np.array([1, 1, 1, 0, 0, 0, 0], dtype=np.uint8))
    assert long_range_constraint(tree, conf, 0, 2, P_HALF) == 1
    assert long_range_constraint(tree, conf, 0, 1, P_HALF) == 0


@given(st.integers(min_value=0, max_value=(1 << 15) - 1))
@settings(max_examples=40)
def test_long_range_nondecreasing_in_range(bits):
    tree = build_tree(2, 3)
    conf = _config(tree, bits)
    values = [long_range_constraint(tree, conf, 0, ell, P_HALF)
              for ell in (1, 2, 3)]
    assert values == sorted(values)


def test_long_range_zero_range_rejected():
    tree = build_tree(2, 1)
    with pytest.raises(ValueError):
        long_range_constraint(tree, _config(tree, 0), 0, 0, P_HALF)


@pytest.mark.parametrize("p", [0.5, 0.35])
@pytest.mark.parametrize("ell", [1, 2, 3])
def test_long_range_blocking_probability_matches_recursion(p, ell):
    """Product-measure weight of a blocked range-ell root equals p_ell / p."""
    tree = build_tree(2, ell)
    params = ModelParams(p=p, j=2)
    n_below = tree.vertex_count - 1
    total = 0.0
    for low_bits in range(1 << n_below):
        conf = Configuration(low_bits << 1, tree.vertex_count)
        if long_range_constraint(tree, conf, 0, ell, params) == 0:
            occupied = bin(low_bits).count("1")
            total += p ** occupied * (1 - p) ** (n_below - occupied)
    expected = survival_series(2, p, ell).values[ell] / p
    assert total == pytest.approx(expected, abs=1e-12)


# ---------------------------------------------------------------------------
# equilibrium sampling and cluster size


def test_sample_equilibrium_degenerate_densities():
    tree = build_tree(2, 3)
    assert sample_equilibrium(tree, 0.0, 7) == Configuration.all_zeros(15)
    assert sample_equilibrium(tree, 1.0, 7) == Configuration.all_ones(15)


def test_sample_equilibrium_deterministic_in_seed():
    tree = build_tree(2, 4)
    assert sample_equilibrium(tree, 0.3, 42) == sample_equilibrium(tree, 0.3, 42)
    assert sample_equilibrium(tree, 0.3, 42) != sample_equilibrium(tree, 0.3, 43)


def test_sample_equilibrium_root_frequency():
    tree = build_tree(2, 10)
    rng = np.random.default_rng(5)
    n = 30_000
    hits = sum(sample_equilibrium(tree, 0.5, rng).occupancy(0) for _ in range(n))
    stderr = 0.5 / np.sqrt(n)
    assert abs(hits / n - 0.5) <= 3 * stderr


def test_cluster_size_examples():
    tree = build_tree(2, 1)
    assert cluster_size(tree, Configuration.all_zeros(3)) == 0
    assert cluster_size(tree, _config(tree, 0b001)) == 1
    assert cluster_size(tree, Configuration.all_ones(3)) == 3
    deep = build_tree(2, 2)
    # root-left-leftgrandchild path occupied, right subtree severed
    conf = Configuration.from_array(np.array([1, 1, 0, 1, 0, 0, 1], dtype=np.uint8))
    assert cluster_size(deep, conf) == 3


def _cluster_recursive(tree, arr, v):
    if arr[v] == 0:
        return 0
    return 1 + sum(_cluster_recursive(tree, arr, c) for c in tree.children_of(v))


def test_cluster_size_matches_recursive_formula_exhaustively():
    tree = build_tree(2, 2)
    for bits in range(128):
        conf = _config(tree, bits)
        assert cluster_size(tree, conf) == _cluster_recursive(tree, conf.as_array(), 0)
