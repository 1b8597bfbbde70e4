"""Interpretable dimensionality reduction for linear regression by averaging correlated features."""

from .errors import LinCFAError
from .io import load_csv, save_csv
from .linreg import LinearFit, ols_fit
from .pca import PcaModel, pca_fit, pca_transform
from .reducer import (
    FittedReducer,
    Partition,
    ReducerConfig,
    aggregate_partition,
    build_partition,
    fit_transform,
    pairwise_decision,
    transform,
)
from .stats import Dataset, StandardizationState, standardize
from .thresholds import AggregationDecision, Sentinel, ThresholdInputs

__version__ = "0.1.0"

__all__ = [
    "AggregationDecision",
    "Dataset",
    "FittedReducer",
    "LinCFAError",
    "LinearFit",
    "Partition",
    "PcaModel",
    "ReducerConfig",
    "Sentinel",
    "StandardizationState",
    "ThresholdInputs",
    "aggregate_partition",
    "build_partition",
    "fit_transform",
    "load_csv",
    "ols_fit",
    "pairwise_decision",
    "pca_fit",
    "pca_transform",
    "save_csv",
    "standardize",
    "transform",
]
