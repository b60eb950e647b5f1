from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from bigtax.dataset import from_arrays, load_csv

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

DATA = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture(scope="session")
def pima():
    return load_csv(DATA / "pima.csv", "class")


@pytest.fixture(scope="session")
def crabs():
    return load_csv(DATA / "crabs.csv", "sex")


@pytest.fixture(scope="session")
def musk():
    return load_csv(DATA / "musk_clean1.csv", "class")


def two_gaussians(n, delta_vec, rng, p=None):
    """Balanced draw from N(0, I) (class 1) and N(delta_vec, I) (class 2)."""
    d = np.asarray(delta_vec, dtype=float)
    y = np.where(np.arange(n) % 2 == 0, 1, 2)
    X = rng.standard_normal((n, d.size)) + (y == 2)[:, None] * d
    return from_arrays(X, y)


def xor_data():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    return from_arrays(X, [1, 1, 2, 2])


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
