"""Synthetic datasets for tests and demonstrations."""
from __future__ import annotations

import numpy as np

from .classifier import CentroidClassifier
from .core import LabeledDataset


def noisy_sinusoids(
    n: int,
    t: int = 30,
    d: int = 3,
    n_classes: int = 2,
    noise: float = 0.3,
    bump_center: float = 0.3,
    bump_width: float = 0.07,
    bump_height: float = 1.5,
    seed: int = 0,
    id_prefix: str = "",
) -> LabeledDataset:
    """Sinusoids with a channel-dependent phase; class ``c`` adds a bump of height ``c*bump_height``.

    The bump sits at ``bump_center * t`` so the discriminative region is
    localized and away from the middle of the series. Labels alternate so
    every class is represented once ``n >= n_classes``.
    """
    rng = np.random.default_rng(seed)
    time = np.arange(t)
    phase = np.linspace(0, np.pi, d, endpoint=False)
    base = np.sin(2 * np.pi * time[:, None] / t * 2 + phase[None, :])
    bump = np.exp(-0.5 * ((time - bump_center * t) / (bump_width * t)) ** 2)[:, None]
    labels = np.arange(n) % n_classes
    X = np.empty((n, t, d))
    for i, y in enumerate(labels):
        X[i] = base + y * bump_height * bump + noise * rng.standard_normal((t, d))
    ids = [f"{id_prefix}{i}" for i in range(n)]
    return LabeledDataset.from_arrays(X, labels, n_classes, ids)


def centroid_weights(model: CentroidClassifier, dataset: LabeledDataset) -> dict[str, np.ndarray]:
    """Per-instance importance vectors from :meth:`CentroidClassifier.feature_weights`."""
    return {inst.id: model.feature_weights(inst) for inst in dataset.instances}


def desk_fixture(seed: int = 0, t: int = 30, d: int = 3, n_train: int = 20, n_test: int = 10,
                 temperature: float = 2.0):
    """Train/test split, fitted centroid model, and train weights for quick experiments."""
    train = noisy_sinusoids(n_train, t, d, seed=seed, id_prefix="train-")
    test = noisy_sinusoids(n_test, t, d, seed=seed + 1000, id_prefix="test-")
    model = CentroidClassifier.fit(train, temperature)
    train = train.with_weights(centroid_weights(model, train))
    return train, test, model
