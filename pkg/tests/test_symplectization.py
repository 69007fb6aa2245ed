import numpy as np
import pytest
from hypothesis import given, strategies as st

from qcosym import fastslow as fs
from qcosym.geometry import (OneFormField, QCosymplecticStructure, ScalarField, SingularMusicalMatrix,
                             sample_points, standard_structure)
from qcosym.symplectization import (check_poisson_morphism, closedness_residual, extended_reeb_check,
                                    extended_reeb_residual, symplectize)

from conftest import tilted_structure, trig_field


def coord(i, dim=3):
    return ScalarField.coordinate(i, dim)


def test_standard_assembly():
    sym = symplectize(standard_structure(1, 1))
    assert sym.names == ("s1", "q1", "p1", "z1")
    W = sym.omega_hat(np.zeros(4))
    # dq^dp + lambda ^ ds with lambda = dz, coordinates (s1, q, p, z)
    expected = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, -1, 0, 0], [1, 0, 0, 0]], dtype=float)
    assert np.array_equal(W, expected)
    assert np.isclose(abs(np.linalg.det(W)), 1.0)


def test_contraction_of_reeb_is_ds():
    sym = symplectize(standard_structure(1, 1))
    W = sym.omega_hat(np.zeros(4))
    assert np.array_equal(W.T @ np.array([0, 0, 0, 1.0]), [1, 0, 0, 0])
    assert np.array_equal(W.T @ np.zeros(4), np.zeros(4))


@pytest.mark.parametrize("make", [lambda: standard_structure(2, 3), fs.build_structure, tilted_structure])
def test_rank_and_closedness(make):
    s = make()
    sym = symplectize(s)
    assert sym.dim == s.dim + s.chart.q
    for y in sample_points(sym.dim, 10, seed=1):
        W = sym.omega_hat(y)
        assert np.array_equal(W, -W.T)
        assert np.linalg.matrix_rank(W) == sym.dim
        assert closedness_residual(sym, y) <= 1e-6


def test_fast_slow_is_eight_dimensional():
    sym = symplectize(fs.build_structure())
    assert sym.dim == 8 and sym.names[:2] == ("s1", "s2")


@pytest.mark.parametrize("make", [lambda: standard_structure(1, 2), fs.build_structure, tilted_structure])
def test_extended_reeb(make):
    sym = symplectize(make())
    pts = sample_points(sym.dim, 20, seed=2)
    assert extended_reeb_check(sym, pts)
    assert max(extended_reeb_residual(sym, y) for y in pts) <= 1e-10


def test_morphism_examples():
    s = standard_structure(1, 1)
    sym = symplectize(s)
    pts = sample_points(4, 10, seed=3)
    assert check_poisson_morphism(sym, coord(0), coord(1), pts)
    for y in pts:
        assert np.isclose(sym.bracket(sym.pullback(coord(0)), sym.pullback(coord(1)), y), 1.0, atol=1e-14)
        assert sym.bracket(sym.pullback(coord(2)), sym.pullback(coord(1)), y) == 0.0
    assert check_poisson_morphism(sym, coord(2), coord(1), pts)
    f = trig_field(3, 5)
    assert check_poisson_morphism(sym, f, f, pts)


def test_morphism_detects_wrong_bracket():
    """Swapping the orientation of Omega flips the upstairs bracket sign for {q, p}."""
    s = standard_structure(1, 1)
    sym = symplectize(s)
    flipped = QCosymplecticStructure(s.chart, type(s.omega)(lambda x: -s.omega(x)), s.lambdas)
    sym_flipped = symplectize(flipped)
    sym_flipped.base = s
    assert not check_poisson_morphism(sym_flipped, coord(0), coord(1), sample_points(4, 2))
    assert check_poisson_morphism(sym, coord(0), coord(1), sample_points(4, 2))


def test_lift_and_project_roundtrip():
    sym = symplectize(fs.build_structure())
    x = np.arange(6.0)
    y = sym.lift(x, [7.0, 8.0])
    assert np.array_equal(y[:2], [7, 8]) and np.array_equal(sym.project(y), x)


def test_symplectize_checks_points():
    base = standard_structure(1, 1)
    bad = QCosymplecticStructure(base.chart, base.omega, (OneFormField.constant([1, 0, 0]),))
    with pytest.raises(SingularMusicalMatrix):
        symplectize(bad, points=[[0, 0, 0]])


@given(y=st.lists(st.floats(-2, 2), min_size=4, max_size=4), a=st.integers(0, 999), b=st.integers(0, 999))
def test_morphism_property_tilted(y, a, b):
    sym = symplectize(tilted_structure())
    assert check_poisson_morphism(sym, trig_field(3, a), trig_field(3, b), [y])
