import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mtscf.classifier import fit_centroid_classifier
from mtscf.synthetic import centroid_weights, desk_fixture, noisy_sinusoids


@pytest.fixture(scope="session")
def desk():
    """(train-with-weights, test, model) for the default 30x3 two-class fixture."""
    return desk_fixture()


@pytest.fixture(scope="session")
def small_desk():
    """A 16x2 fixture with a 12-instance reference, used by the search-order tests."""
    train = noisy_sinusoids(12, t=16, d=2, seed=7, id_prefix="r")
    model = fit_centroid_classifier(train, temperature=2.0)
    test = noisy_sinusoids(6, t=16, d=2, seed=8, id_prefix="q")
    return train.with_weights(centroid_weights(model, train)), test, model


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE: list[str] = []


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line for an acceptance criterion, then assert it."""
    def record(number: int, title: str, ok: bool, detail: str = ""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
