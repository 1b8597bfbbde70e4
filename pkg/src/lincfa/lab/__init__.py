"""Synthetic generators, Monte Carlo bias/variance estimation and experiment runners."""

from .generators import GeneratorSpec, Structure, build_structure, gen_bivariate, gen_ddim, gen_trivariate, rep_rng
from .montecarlo import MonteCarloReport, monte_carlo_bias_variance, variance_difference
from .experiments import (
    ExperimentReport,
    compare_models,
    run_coverage,
    run_experiment_2d,
    run_experiment_3d,
    run_experiment_ddim,
)

__all__ = [
    "GeneratorSpec",
    "Structure",
    "build_structure",
    "gen_bivariate",
    "gen_trivariate",
    "gen_ddim",
    "rep_rng",
    "MonteCarloReport",
    "monte_carlo_bias_variance",
    "variance_difference",
    "ExperimentReport",
    "compare_models",
    "run_coverage",
    "run_experiment_2d",
    "run_experiment_3d",
    "run_experiment_ddim",
]
