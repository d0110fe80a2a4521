"""Multi-objective counterfactual explanations for multivariate time series classifiers."""
from .classifier import (
    CentroidClassifier,
    Classifier,
    CountingClassifier,
    ExternalClassifier,
    external_classifier,
    fit_centroid_classifier,
    prediction_call_counter,
)
from .core import LabeledDataset, MtsInstance, Subsequence, full_substitution, hamming, substitute_window
from .distances import DistanceKind, dist_dtw, dist_l1, dist_l2, knn_indices
from .engine import CounterfactualReport, EngineConfig, explain, explain_batch, reselect, select_best
from .metrics import MetricsSummary, summarize
from .nun import NunResult, find_nun
from .subsequence import NaiveResult, find_subsequence, naive_stage

__version__ = "0.1.0"

__all__ = [
    "CentroidClassifier",
    "Classifier",
    "CounterfactualReport",
    "CountingClassifier",
    "DistanceKind",
    "EngineConfig",
    "ExternalClassifier",
    "LabeledDataset",
    "MetricsSummary",
    "MtsInstance",
    "NaiveResult",
    "NunResult",
    "Subsequence",
    "dist_dtw",
    "dist_l1",
    "dist_l2",
    "explain",
    "explain_batch",
    "external_classifier",
    "find_nun",
    "find_subsequence",
    "fit_centroid_classifier",
    "full_substitution",
    "hamming",
    "knn_indices",
    "naive_stage",
    "prediction_call_counter",
    "reselect",
    "select_best",
    "substitute_window",
    "summarize",
]
