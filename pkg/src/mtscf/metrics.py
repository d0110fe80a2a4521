"""Evaluation metrics over batches of counterfactual reports.

Per-instance quantities are averaged over that instance's counterfactuals,
then over instances. Instances without counterfactuals only count against
coverage. ``scope="best"`` restricts every average to the selected CE of each
instance instead of the whole set.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .classifier import Classifier
from .core import LabeledDataset, hamming
from .distances import dist_dtw, dist_l1, dist_l2, knn_indices
from .engine import CounterfactualReport
from .errors import StructuralError, UndefinedMetricError


@dataclass(frozen=True)
class MetricsSummary:
    cov: float
    val: float | None
    spa: float | None
    conf: float | None
    ynn: float | None
    l1: float | None
    l2: float | None
    dtw: float | None
    n_instances: int
    n_ces: int

    def to_dict(self) -> dict:
        return asdict(self)


def _ce_sets(reports: Sequence[CounterfactualReport], scope: str):
    if scope not in ("all", "best"):
        raise StructuralError(f"scope must be 'all' or 'best', got {scope!r}")
    for r in reports:
        if not r.ces:
            continue
        ces = r.ces if scope == "all" else [r.ces[r.best_index]]
        yield r, ces


def _nested_mean(reports, per_ce: Callable, scope: str, name: str) -> float:
    inner = [np.mean([per_ce(r, c) for c in ces]) for r, ces in _ce_sets(reports, scope)]
    if not inner:
        raise UndefinedMetricError(f"{name} is undefined: no counterfactuals in any report")
    return float(np.mean(inner))


def sparsity(reports: Sequence[CounterfactualReport], scope: str = "all") -> float:
    """Mean fraction of unchanged cells."""
    def per_ce(r, c):
        return 1.0 - hamming(r.query, c.instance) / (r.query.t * r.query.d)

    return _nested_mean(reports, per_ce, scope, "sparsity")


def confidence_metric(classifier: Classifier, reports: Sequence[CounterfactualReport], scope: str = "all") -> float:
    """Mean of ``1 - P(original class)`` on the counterfactuals."""
    def per_ce(r, c):
        original = classifier.predict(r.query)
        return 1.0 - float(classifier.predict_proba(c.instance)[original])

    return _nested_mean(reports, per_ce, scope, "confidence")


def validity(classifier: Classifier, reports: Sequence[CounterfactualReport], scope: str = "all") -> float:
    """Mean fraction of counterfactuals whose predicted class differs from the query's."""
    def per_ce(r, c):
        return float(classifier.predict(c.instance) != classifier.predict(r.query))

    return _nested_mean(reports, per_ce, scope, "validity")


def ynn(
    classifier: Classifier,
    reports: Sequence[CounterfactualReport],
    reference: LabeledDataset,
    k: int = 5,
    mode: str = "prose",
    scope: str = "all",
) -> float:
    """Neighbourhood agreement of each CE's predicted class among its ``k`` DTW-nearest references.

    ``mode="prose"`` scores the agreeing fraction (higher is better);
    ``mode="literal"`` scores one minus it.
    """
    if mode not in ("prose", "literal"):
        raise StructuralError(f"ynn mode must be 'prose' or 'literal', got {mode!r}")
    if len(reference) < k:
        raise StructuralError(f"reference has {len(reference)} instances, fewer than k={k}")
    ref_pred = np.array([classifier.predict(x) for x in reference.instances])

    def per_ce(r, c):
        nn = knn_indices(c.instance, reference.instances, k, "dtw")
        agree = float(np.mean(ref_pred[nn] == classifier.predict(c.instance)))
        return agree if mode == "prose" else 1.0 - agree

    return _nested_mean(reports, per_ce, scope, "yNN")


def coverage(reports: Sequence[CounterfactualReport], attempted: int) -> float:
    """Percentage of attempted instances that received at least one counterfactual."""
    if attempted <= 0:
        raise UndefinedMetricError("coverage is undefined when no instance was attempted")
    found = sum(1 for r in reports if r.ces)
    return 100.0 * found / attempted


def proximity_means(reports: Sequence[CounterfactualReport], scope: str = "all") -> tuple[float, float, float]:
    """Mean L1, L2 and DTW distance between each CE and its query, pooled over all CEs."""
    rows = [
        (dist_l1(r.query, c.instance), dist_l2(r.query, c.instance), dist_dtw(r.query, c.instance))
        for r, ces in _ce_sets(reports, scope)
        for c in ces
    ]
    if not rows:
        raise UndefinedMetricError("proximity is undefined: no counterfactuals in any report")
    m = np.mean(np.array(rows), axis=0)
    return float(m[0]), float(m[1]), float(m[2])


def _maybe(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except UndefinedMetricError:
        return None


def summarize(
    classifier: Classifier,
    reports: Sequence[CounterfactualReport],
    reference: LabeledDataset,
    attempted: int | None = None,
    ynn_k: int = 5,
    ynn_mode: str = "prose",
    scope: str = "all",
) -> MetricsSummary:
    attempted = len(reports) if attempted is None else attempted
    prox = _maybe(proximity_means, reports, scope) or (None, None, None)
    return MetricsSummary(
        cov=coverage(reports, attempted),
        val=_maybe(validity, classifier, reports, scope),
        spa=_maybe(sparsity, reports, scope),
        conf=_maybe(confidence_metric, classifier, reports, scope),
        ynn=_maybe(ynn, classifier, reports, reference, ynn_k, ynn_mode, scope),
        l1=prox[0],
        l2=prox[1],
        dtw=prox[2],
        n_instances=attempted,
        n_ces=sum(len(r.ces) for r in reports),
    )
