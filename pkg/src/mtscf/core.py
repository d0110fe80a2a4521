"""Domain types for multivariate time series and window substitution."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import StructuralError


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MtsInstance:
    """One multivariate series stored as a ``(t, d)`` array (time steps x channels).

    The array is copied on construction and marked read-only.
    """

    values: np.ndarray
    id: str = ""

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise StructuralError(f"instance {self.id!r}: expected a (t, d) array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise StructuralError(f"instance {self.id!r}: values must be finite")
        object.__setattr__(self, "values", _frozen_array(arr))
        object.__setattr__(self, "id", str(self.id))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def t(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def same_values(self, other: "MtsInstance") -> bool:
        return self.shape == other.shape and bool(np.array_equal(self.values, other.values))


def as_array(x) -> np.ndarray:
    """Return the ``(t, d)`` value array of an instance or array-like."""
    if isinstance(x, MtsInstance):
        return x.values
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


@dataclass(frozen=True)
class Subsequence:
    """Inclusive time window ``[start, end]``."""

    start: int
    end: int

    def __post_init__(self):
        s, e = int(self.start), int(self.end)
        if s < 0 or e < s:
            raise StructuralError(f"invalid window [{s}, {e}]")
        object.__setattr__(self, "start", s)
        object.__setattr__(self, "end", e)

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def check_fits(self, t: int) -> None:
        if self.end >= t:
            raise StructuralError(f"window [{self.start}, {self.end}] exceeds series length {t}")

    def as_slice(self) -> slice:
        return slice(self.start, self.end + 1)


def feature_weights(weights, t: int | None = None) -> np.ndarray:
    """Validate a per-time-step importance vector and return it as a read-only array."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size < 1:
        raise StructuralError(f"feature weights must be a non-empty vector, got shape {w.shape}")
    if t is not None and w.size != t:
        raise StructuralError(f"feature weights have length {w.size}, expected {t}")
    if not np.all(np.isfinite(w)):
        raise StructuralError("feature weights must be finite")
    return _frozen_array(w)


@dataclass(eq=False)
class LabeledDataset:
    """Equal-length series with integer labels and optional per-instance weights."""

    instances: list[MtsInstance]
    labels: np.ndarray
    n_classes: int
    weights: dict[str, np.ndarray] | None = None
    _index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.instances = list(self.instances)
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        self.n_classes = int(self.n_classes)
        if self.n_classes < 1:
            raise StructuralError("n_classes must be positive")
        if len(self.labels) != len(self.instances):
            raise StructuralError(
                f"{len(self.instances)} instances but {len(self.labels)} labels"
            )
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise StructuralError(f"labels must lie in [0, {self.n_classes})")
        if self.instances:
            shape = self.instances[0].shape
            for inst in self.instances:
                if inst.shape != shape:
                    raise StructuralError(
                        f"instance {inst.id!r} has shape {inst.shape}, dataset shape is {shape}"
                    )
        self._index = {}
        for i, inst in enumerate(self.instances):
            if inst.id in self._index:
                raise StructuralError(f"duplicate instance id {inst.id!r}")
            self._index[inst.id] = i
        if self.weights is not None:
            t = self.t if self.instances else None
            self.weights = {str(k): feature_weights(v, t) for k, v in self.weights.items()}

    def __len__(self) -> int:
        return len(self.instances)

    @property
    def shape(self) -> tuple[int, int]:
        if not self.instances:
            raise StructuralError("empty dataset has no shape")
        return self.instances[0].shape

    @property
    def t(self) -> int:
        return self.shape[0]

    @property
    def d(self) -> int:
        return self.shape[1]

    def index_of(self, instance_id: str) -> int:
        try:
            return self._index[instance_id]
        except KeyError:
            raise StructuralError(f"unknown instance id {instance_id!r}") from None

    def get(self, instance_id: str) -> MtsInstance:
        return self.instances[self.index_of(instance_id)]

    def weights_for(self, instance_id: str) -> np.ndarray | None:
        if self.weights is None:
            return None
        return self.weights.get(instance_id)

    def stacked(self) -> np.ndarray:
        """All values as an ``(n, t, d)`` array."""
        return np.stack([inst.values for inst in self.instances])

    def with_weights(self, weights: Mapping[str, np.ndarray] | None) -> "LabeledDataset":
        return LabeledDataset(self.instances, self.labels, self.n_classes, dict(weights) if weights else None)

    @classmethod
    def from_arrays(
        cls,
        X: np.ndarray,
        y: Sequence[int],
        n_classes: int | None = None,
        ids: Sequence[str] | None = None,
        weights: Mapping[str, np.ndarray] | None = None,
    ) -> "LabeledDataset":
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 3:
            raise StructuralError(f"expected an (n, t, d) array, got shape {X.shape}")
        ids = [str(i) for i in range(len(X))] if ids is None else list(ids)
        y = np.asarray(y, dtype=np.int64)
        if n_classes is None:
            n_classes = int(y.max()) + 1 if len(y) else 1
        instances = [MtsInstance(x, id=i) for x, i in zip(X, ids)]
        return cls(instances, y, n_classes, dict(weights) if weights else None)


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise StructuralError(f"shape mismatch: {a.shape} vs {b.shape}")


def substitute_window(base, donor, window: Subsequence, mask) -> MtsInstance:
    """Copy donor values into ``base`` at the masked cells of ``window``.

    ``mask`` has shape ``(window.length, d)``; cells where it is 0 keep the
    base value bit for bit.
    """
    b, dn = as_array(base), as_array(donor)
    _check_same_shape(b, dn)
    window.check_fits(b.shape[0])
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (window.length, b.shape[1]):
        raise StructuralError(
            f"mask shape {mask.shape} does not match window ({window.length}, {b.shape[1]})"
        )
    out = b.copy()
    sl = window.as_slice()
    out[sl] = np.where(mask, dn[sl], b[sl])
    return MtsInstance(out, id=getattr(base, "id", ""))


def full_substitution(base, donor, window: Subsequence) -> MtsInstance:
    """Replace every channel of ``base`` inside ``window`` with the donor's values."""
    d = as_array(base).shape[1]
    return substitute_window(base, donor, window, np.ones((window.length, d), dtype=bool))


def hamming(a, b) -> int:
    """Number of cells whose stored values differ (exact comparison)."""
    x, y = as_array(a), as_array(b)
    _check_same_shape(x, y)
    return int(np.count_nonzero(x != y))
