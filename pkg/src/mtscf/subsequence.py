"""Most influential window search and the naive substitution stage."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import Classifier
from .core import MtsInstance, Subsequence, as_array, feature_weights, full_substitution
from .errors import StructuralError
from .nun import NunResult


def find_subsequence(weights, ell: int) -> Subsequence:
    """Window of length ``ell`` with the largest weight sum; the earliest start wins ties.

    Weights may be negative. Runs a single sliding pass.
    """
    w = feature_weights(weights)
    t = w.size
    if not 1 <= ell <= t:
        raise StructuralError(f"window length {ell} outside [1, {t}]")
    start = 0
    best = curr = float(w[:ell].sum())
    for i in range(1, t - ell + 1):
        curr = curr - w[i - 1] + w[i + ell - 1]
        if curr > best:
            best, start = curr, i
    return Subsequence(start, start + ell - 1)


@dataclass(frozen=True, eq=False)
class NaiveResult:
    c0: MtsInstance
    window: Subsequence
    length: int
    confidence: float
    proba: np.ndarray
    probes: int


def naive_stage(
    classifier: Classifier,
    query,
    nun: NunResult,
    weights,
    theta: float,
) -> NaiveResult:
    """Grow a full-substitution window from length 2 until the target confidence reaches ``theta``.

    Each step places the window with :func:`find_subsequence` on the NUN's
    weights. At length ``t`` the candidate is the NUN itself, which passed the
    same threshold during retrieval, so the loop always stops.
    """
    q = as_array(query)
    t = q.shape[0]
    w = feature_weights(weights, t)
    if t < 2:
        raise StructuralError("series must have at least 2 time steps")
    c = nun.target_class
    probes = 0
    for ell in range(2, t + 1):
        window = find_subsequence(w, ell)
        c0 = full_substitution(query, nun.nun, window)
        proba = classifier.predict_proba(c0)
        probes += 1
        if proba[c] >= theta or ell == t:
            return NaiveResult(c0, window, ell, float(proba[c]), proba, probes)
    raise AssertionError("unreachable")
