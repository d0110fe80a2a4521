"""L1, L2 and dependent multivariate DTW distances, plus k-NN lookup."""
from __future__ import annotations

from enum import Enum
from typing import Callable, Sequence

import numba
import numpy as np

from .core import as_array
from .errors import StructuralError


class DistanceKind(str, Enum):
    L1 = "l1"
    L2 = "l2"
    DTW = "dtw"

    @classmethod
    def parse(cls, value: "str | DistanceKind") -> "DistanceKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise StructuralError(f"unknown distance {value!r}; choose from l1, l2, dtw") from None


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    x, y = as_array(a), as_array(b)
    if x.shape != y.shape:
        raise StructuralError(f"shape mismatch: {x.shape} vs {y.shape}")
    return x, y


def dist_l1(a, b) -> float:
    x, y = _pair(a, b)
    return float(np.abs(x - y).sum())


def dist_l2(a, b) -> float:
    x, y = _pair(a, b)
    diff = (x - y).ravel()
    return float(np.sqrt(diff @ diff))


@numba.njit(cache=True)
def _dtw_kernel(x, y):
    n, m = x.shape[0], y.shape[0]
    d = x.shape[1]
    inf = np.inf
    prev = np.full(m + 1, inf)
    curr = np.full(m + 1, inf)
    prev[0] = 0.0
    for i in range(1, n + 1):
        curr[0] = inf
        for j in range(1, m + 1):
            s = 0.0
            for k in range(d):
                diff = x[i - 1, k] - y[j - 1, k]
                s += diff * diff
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if curr[j - 1] < best:
                best = curr[j - 1]
            curr[j] = np.sqrt(s) + best
        prev, curr = curr, prev
    return prev[m]


def dist_dtw(a, b) -> float:
    """Dependent DTW: Euclidean local cost between d-vectors, steps (1,0),(0,1),(1,1), no band.

    Series may differ in length but must share the channel count.
    """
    x, y = as_array(a), as_array(b)
    if x.shape[0] == 0 or y.shape[0] == 0:
        raise StructuralError("DTW needs non-empty series")
    if x.shape[1] != y.shape[1]:
        raise StructuralError(f"channel mismatch: {x.shape[1]} vs {y.shape[1]}")
    return float(_dtw_kernel(np.ascontiguousarray(x), np.ascontiguousarray(y)))


_KERNELS: dict[DistanceKind, Callable[..., float]] = {
    DistanceKind.L1: dist_l1,
    DistanceKind.L2: dist_l2,
    DistanceKind.DTW: dist_dtw,
}


def distance_fn(kind: "str | DistanceKind") -> Callable[..., float]:
    return _KERNELS[DistanceKind.parse(kind)]


def distance(a, b, kind: "str | DistanceKind" = DistanceKind.L2) -> float:
    return distance_fn(kind)(a, b)


def knn_indices(query, pool: Sequence, k: int, kind: "str | DistanceKind" = DistanceKind.L2) -> list[int]:
    """Indices of the ``k`` closest pool members, nearest first; ties go to the lower index."""
    if len(pool) == 0:
        raise StructuralError("empty pool")
    if k <= 0:
        raise StructuralError("k must be positive")
    if k > len(pool):
        raise StructuralError(f"k={k} exceeds pool size {len(pool)}")
    fn = distance_fn(kind)
    dists = np.array([fn(query, p) for p in pool])
    return [int(i) for i in np.argsort(dists, kind="stable")[:k]]
