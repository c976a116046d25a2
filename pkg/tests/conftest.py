import numpy as np
import pytest

from kcmtree.model import Configuration, ModelParams
from kcmtree.montecarlo import marginal_counts, simulate, simulate_trace
from kcmtree.recursions import cluster_gap_lower_bound, survival_series
from kcmtree.tree import build_tree


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Touch every jitted kernel once so timed tests never pay compilation."""
    tree = build_tree(2, 1)
    params = ModelParams(p=0.5, j=2)
    simulate(tree, params, horizon=4.0, seed=1, sample_interval=0.5)
    simulate_trace(tree, params, horizon=1.0, seed=1, max_events=64)
    marginal_counts(tree, params, Configuration.all_ones(3), (0,),
                    np.array([0.5]), n_replicas=4, seed=1)
    cluster_gap_lower_bound(2, 0.5, 8, method="mc", n_samples=64, seed=1)
    survival_series(2, 0.5, 4)
