"""Prediction contract and the classifiers shipped with the package."""
from __future__ import annotations

import json
import shlex
import subprocess
import threading
from typing import Sequence

import numpy as np

from .core import LabeledDataset, as_array
from .errors import FitError, PredictionError

# External replies whose sum is off by more than this are rejected, not renormalized.
RENORMALIZE_TOLERANCE = 1e-6


class Classifier:
    """Maps one ``(t, d)`` series to a probability vector over ``n_classes``.

    Implementations must be deterministic and safe to call from several
    threads. ``predict`` breaks argmax ties toward the lowest class index.
    """

    n_classes: int

    def predict_proba(self, x) -> np.ndarray:
        raise NotImplementedError

    def predict(self, x) -> int:
        return int(np.argmax(self.predict_proba(x)))

    def __call__(self, x) -> np.ndarray:
        return self.predict_proba(x)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


class CentroidClassifier(Classifier):
    """Softmax over negative scaled Euclidean distances to per-class mean series."""

    def __init__(self, centroids: np.ndarray, temperature: float = 1.0):
        centroids = np.asarray(centroids, dtype=np.float64)
        if centroids.ndim != 3:
            raise FitError(f"centroids must be (n_classes, t, d), got {centroids.shape}")
        if not temperature > 0:
            raise FitError("temperature must be positive")
        self.centroids = centroids
        self.centroids.setflags(write=False)
        self.temperature = float(temperature)
        self.n_classes = centroids.shape[0]

    @classmethod
    def fit(cls, train: LabeledDataset, temperature: float = 1.0) -> "CentroidClassifier":
        if len(train) == 0:
            raise FitError("cannot fit on an empty dataset")
        X = train.stacked()
        centroids = []
        for c in range(train.n_classes):
            members = X[train.labels == c]
            if len(members) == 0:
                raise FitError(f"class {c} has no training instances")
            centroids.append(members.mean(axis=0))
        return cls(np.stack(centroids), temperature)

    def distances(self, x) -> np.ndarray:
        arr = as_array(x)
        if arr.shape != self.centroids.shape[1:]:
            raise PredictionError(f"input shape {arr.shape} != model shape {self.centroids.shape[1:]}")
        diff = self.centroids - arr[None]
        return np.sqrt(np.einsum("ktd,ktd->k", diff, diff))

    def predict_proba(self, x) -> np.ndarray:
        return softmax(-self.temperature * self.distances(x))

    def feature_weights(self, x) -> np.ndarray:
        """Per-time-step importance for the class predicted on ``x``.

        Stand-in for a class activation map: the squared gap between the
        predicted class centroid and the closest rival centroid, averaged over
        channels. Time steps where the classes are far apart score high.
        """
        if self.n_classes < 2:
            return np.zeros(self.centroids.shape[1])
        dist = self.distances(x)
        c = int(np.argmax(-dist))
        rivals = [k for k in range(self.n_classes) if k != c]
        rival = rivals[int(np.argmin(dist[rivals]))]
        gap = self.centroids[c] - self.centroids[rival]
        return (gap**2).mean(axis=1)

    def to_dict(self) -> dict:
        return {"temperature": self.temperature, "centroids": self.centroids.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "CentroidClassifier":
        return cls(np.array(doc["centroids"], dtype=np.float64), doc["temperature"])


def fit_centroid_classifier(train: LabeledDataset, temperature: float = 1.0) -> CentroidClassifier:
    return CentroidClassifier.fit(train, temperature)


def check_probability_vector(p, n_classes: int, tol: float = RENORMALIZE_TOLERANCE) -> np.ndarray:
    """Validate a probability vector, renormalizing float noise up to ``tol``."""
    try:
        arr = np.asarray(p, dtype=np.float64).reshape(-1)
    except (TypeError, ValueError):
        raise PredictionError(f"probabilities are not numeric: {p!r}") from None
    if arr.size != n_classes:
        raise PredictionError(f"expected {n_classes} probabilities, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise PredictionError("probabilities must be finite")
    if arr.min() < -tol or arr.max() > 1 + tol:
        raise PredictionError(f"probabilities outside [0, 1]: {arr.tolist()}")
    total = arr.sum()
    if abs(total - 1.0) > tol:
        raise PredictionError(f"probabilities sum to {total!r}")
    arr = np.clip(arr, 0.0, 1.0)
    return arr / arr.sum()


class ExternalClassifier(Classifier):
    """Bridge to a child process speaking one JSON document per line.

    Handshake ``{"op": "hello"}`` -> ``{"n_classes": K}``; then
    ``{"op": "predict", "series": [[...], ...]}`` -> ``{"proba": [...]}``.
    Requests are serialized over the single child with a lock.
    """

    def __init__(self, command: str | Sequence[str], n_classes: int):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.n_classes = int(n_classes)
        self._lock = threading.Lock()
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise PredictionError(f"cannot start classifier process {argv!r}: {exc}") from None
        reply = self._request({"op": "hello"})
        k = reply.get("n_classes")
        if k != self.n_classes:
            self.close()
            raise PredictionError(f"child reports n_classes={k!r}, expected {self.n_classes}")

    def _request(self, payload: dict) -> dict:
        with self._lock:
            if self._proc.poll() is not None:
                raise PredictionError(f"classifier process exited with code {self._proc.returncode}")
            try:
                self._proc.stdin.write(json.dumps(payload) + "\n")
                self._proc.stdin.flush()
                line = self._proc.stdout.readline()
            except (BrokenPipeError, OSError) as exc:
                raise PredictionError(f"classifier process channel failed: {exc}") from None
        if not line:
            code = self._proc.poll()
            raise PredictionError(f"classifier process closed its output (exit code {code})")
        try:
            reply = json.loads(line)
        except json.JSONDecodeError:
            raise PredictionError(f"malformed reply from classifier process: {line.strip()[:200]!r}") from None
        if not isinstance(reply, dict):
            raise PredictionError(f"reply is not a JSON object: {line.strip()[:200]!r}")
        if "error" in reply:
            raise PredictionError(f"classifier process error: {reply['error']}")
        return reply

    def predict_proba(self, x) -> np.ndarray:
        reply = self._request({"op": "predict", "series": as_array(x).tolist()})
        if "proba" not in reply:
            raise PredictionError(f"reply lacks 'proba': {reply!r}")
        return check_probability_vector(reply["proba"], self.n_classes)

    def close(self) -> None:
        proc = getattr(self, "_proc", None)
        if proc is None or proc.poll() is not None:
            return
        try:
            proc.stdin.close()
            proc.wait(timeout=5)
        except (OSError, subprocess.TimeoutExpired):
            proc.kill()
            proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass


def external_classifier(command: str | Sequence[str], n_classes: int) -> ExternalClassifier:
    return ExternalClassifier(command, n_classes)


class CountingClassifier(Classifier):
    """Wraps a classifier and counts ``predict_proba`` calls."""

    def __init__(self, inner: Classifier):
        self.inner = inner
        self.n_classes = inner.n_classes
        self._count = 0
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return self._count

    def predict_proba(self, x) -> np.ndarray:
        with self._lock:
            self._count += 1
        return self.inner.predict_proba(x)

    def __getattr__(self, name):
        if name == "inner":
            raise AttributeError(name)
        return getattr(self.inner, name)


def prediction_call_counter(inner: Classifier) -> CountingClassifier:
    return CountingClassifier(inner)
