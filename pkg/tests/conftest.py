import hypothesis
import numpy as np
import pytest

from qcosym.geometry import (Chart, OneFormField, QCosymplecticStructure, ScalarField, TwoFormField,
                             sample_points, standard_structure, wedge)
from qcosym import fastslow as fs

hypothesis.settings.register_profile("ci", max_examples=50, deadline=None)
hypothesis.settings.load_profile("ci")

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        ok, line = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {k:2d}. {line}")


def trig_field(dim: int, seed: int, terms: int = 3) -> ScalarField:
    """Sum of ``c_k sin(b_k . x + phi_k)`` with an analytic gradient."""
    rng = np.random.default_rng(seed)
    B = rng.normal(size=(terms, dim)) * 0.7
    c = rng.normal(size=terms)
    phi = rng.uniform(0, 2 * np.pi, size=terms)

    def f(x):
        return float(c @ np.sin(B @ x + phi))

    def df(x):
        return (c * np.cos(B @ x + phi)) @ B

    return ScalarField(f, df)


def tilted_structure() -> QCosymplecticStructure:
    """``(2 + cos q) dq^dp`` with ``lambda = d(z + p sin q)`` on ``(q, p, z)``.

    Closed forms with non-constant components; the Reeb field is still d/dz.
    """
    def W(x):
        return (2.0 + np.cos(x[0])) * wedge([1, 0, 0], [0, 1, 0])

    def lam(x):
        q, p, _ = x
        return np.array([p * np.cos(q), np.sin(q), 1.0])

    return QCosymplecticStructure(Chart(1, 1, ("q", "p", "z")), TwoFormField(W), (OneFormField(lam),))


@pytest.fixture
def standard():
    return standard_structure(1, 1)


@pytest.fixture
def fast_slow():
    return fs.build_structure()


@pytest.fixture
def tilted():
    return tilted_structure()


@pytest.fixture
def points3():
    return sample_points(3, 20, seed=1)


@pytest.fixture
def points6():
    return sample_points(6, 20, seed=2)
