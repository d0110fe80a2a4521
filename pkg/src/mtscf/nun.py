"""Nearest unlike neighbor retrieval."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import Classifier
from .core import LabeledDataset, MtsInstance, as_array
from .distances import DistanceKind, distance_fn
from .errors import StructuralError


@dataclass(frozen=True, eq=False)
class NunResult:
    nun: MtsInstance
    nun_index: int
    target_class: int
    confidence: float
    distance: float


def nun_candidates(
    classifier: Classifier,
    query,
    reference: LabeledDataset,
    theta: float,
    reference_proba: np.ndarray | None = None,
    query_proba: np.ndarray | None = None,
) -> np.ndarray:
    """Reference indices whose predicted class differs from the query's and whose
    confidence in that predicted class is at least ``theta``."""
    if query_proba is None:
        query_proba = classifier.predict_proba(query)
    if reference_proba is None:
        reference_proba = np.stack([classifier.predict_proba(r) for r in reference.instances])
    query_class = int(np.argmax(query_proba))
    ref_class = np.argmax(reference_proba, axis=1)
    ref_conf = reference_proba[np.arange(len(ref_class)), ref_class]
    keep = (ref_class != query_class) & (ref_conf >= theta)
    return np.flatnonzero(keep)


def find_nun(
    classifier: Classifier,
    query,
    reference: LabeledDataset,
    theta: float = 0.51,
    kind: "str | DistanceKind" = DistanceKind.L2,
    reference_proba: np.ndarray | None = None,
    query_proba: np.ndarray | None = None,
) -> NunResult | None:
    """Closest confidently-classified reference instance of another predicted class.

    Filters first, then scans distances; returns None when nothing passes the filter.
    ``reference_proba`` lets batch callers reuse predictions on the reference set.
    """
    if len(reference) == 0:
        raise StructuralError("reference set is empty")
    if not 0.0 <= theta <= 1.0:
        raise StructuralError(f"theta must lie in [0, 1], got {theta}")
    q = as_array(query)
    if q.shape != reference.shape:
        raise StructuralError(f"query shape {q.shape} != reference shape {reference.shape}")
    if reference_proba is None:
        reference_proba = np.stack([classifier.predict_proba(r) for r in reference.instances])
    idx = nun_candidates(classifier, query, reference, theta, reference_proba, query_proba)
    if idx.size == 0:
        return None
    fn = distance_fn(kind)
    dists = np.array([fn(q, reference.instances[i]) for i in idx])
    best = int(np.argmin(dists))
    i = int(idx[best])
    target = int(np.argmax(reference_proba[i]))
    return NunResult(
        nun=reference.instances[i],
        nun_index=i,
        target_class=target,
        confidence=float(reference_proba[i, target]),
        distance=float(dists[best]),
    )
