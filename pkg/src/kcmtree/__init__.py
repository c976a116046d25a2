"""Kinetically constrained spin dynamics on rooted k-ary trees.

A vertex may refresh its spin only when enough of its children are empty;
the package computes exact spectra and mixing times on small trees, runs
event-driven Monte Carlo on large ones, evaluates the closed-form survival
and cluster recursions, and assembles the scaling experiments that exhibit
the critical power-law slowdown.
"""
from .analysis import (
    CriticalScalingReport,
    ExperimentConfig,
    MixingReport,
    ProbeReport,
    QuasicriticalReport,
    ScalingFit,
    fit_power_law,
    run_critical_scaling,
    run_discontinuous_probe,
    run_mixing_scaling,
    run_quasicritical_scaling,
)
from .bounds import (
    hellinger,
    product_distribution,
    product_mixing_threshold,
    product_tv_lower_bound,
    tv_distance,
    worst_start_index,
)
from .model import (
    Configuration,
    ModelParams,
    bootstrap_iterate,
    bootstrap_step,
    cluster_size,
    constraint,
    constraint_mask,
    sample_equilibrium,
)
from .montecarlo import (
    AutocorrEstimate,
    EventTrace,
    FitPolicy,
    RelaxationEstimate,
    RelaxationMeasurement,
    TimeSeries,
    TVLowerProfile,
    autocorrelation,
    derive_seed,
    estimate_relaxation_time,
    marginal_counts,
    measure_relaxation_time,
    simulate,
    simulate_trace,
    tv_lower_profile,
)
from .recursions import (
    GapBoundResult,
    RecursionSeries,
    cluster_gap_lower_bound,
    cluster_mean_series,
    cluster_variance_series,
    critical_density,
    survival_bounds,
    survival_limit,
    survival_series,
)
from .spectral import (
    MixingTimeResult,
    SparseGenerator,
    build_generator,
    dirichlet_form,
    evolve_distribution,
    evolve_observable,
    mixing_time_exact,
    slow_mode,
    spectral_gap,
    stationary_measure,
    variance,
)
from .tree import TreeTopology, build_tree, tree_vertex_count

__version__ = "0.1.0"

__all__ = [
    "AutocorrEstimate",
    "Configuration",
    "CriticalScalingReport",
    "EventTrace",
    "ExperimentConfig",
    "FitPolicy",
    "GapBoundResult",
    "MixingReport",
    "MixingTimeResult",
    "ModelParams",
    "ProbeReport",
    "QuasicriticalReport",
    "RecursionSeries",
    "RelaxationEstimate",
    "RelaxationMeasurement",
    "ScalingFit",
    "SparseGenerator",
    "TVLowerProfile",
    "TimeSeries",
    "TreeTopology",
    "autocorrelation",
    "bootstrap_iterate",
    "bootstrap_step",
    "build_generator",
    "build_tree",
    "cluster_gap_lower_bound",
    "cluster_mean_series",
    "cluster_size",
    "cluster_variance_series",
    "constraint",
    "constraint_mask",
    "critical_density",
    "derive_seed",
    "dirichlet_form",
    "estimate_relaxation_time",
    "evolve_distribution",
    "evolve_observable",
    "fit_power_law",
    "hellinger",
    "marginal_counts",
    "measure_relaxation_time",
    "mixing_time_exact",
    "product_distribution",
    "product_mixing_threshold",
    "product_tv_lower_bound",
    "run_critical_scaling",
    "run_discontinuous_probe",
    "run_mixing_scaling",
    "run_quasicritical_scaling",
    "sample_equilibrium",
    "simulate",
    "simulate_trace",
    "slow_mode",
    "spectral_gap",
    "stationary_measure",
    "survival_bounds",
    "survival_limit",
    "survival_series",
    "tree_vertex_count",
    "tv_distance",
    "tv_lower_profile",
    "variance",
    "worst_start_index",
]
