import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qcosym import fastslow as fs
from qcosym.flow import (IntegratorConfig, NonFiniteState, StepSizeUnderflow, convergence_order, integrate,
                         rk4_step, tolerance_slope)


def oscillator(x):
    return np.array([x[1], -x[0]])


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(method="euler")
    with pytest.raises(ValueError):
        IntegratorConfig(t_max=1.0, dt=1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(rtol=0)
    with pytest.raises(ValueError):
        IntegratorConfig(record_every=0)


def test_harmonic_slice_adaptive():
    """eps = 0, omega0 = 1 on the full fast-slow field: q(s) = cos s."""
    model = fs.case_a_model(eps=0.0)
    model = fs.FastSlowModel(model.omega, model.omega_prime, fs.ZERO_POTENTIAL, 0.0)
    traj = integrate(fs.full_field(model), [0, 0, 1, 0, 0, 0], IntegratorConfig(t_max=2 * np.pi))
    assert traj.times[-1] == 2 * np.pi
    assert abs(traj.states[-1, fs.Q_FAST] - 1.0) <= 1e-8
    assert np.allclose(traj.states[:, fs.Q_FAST], np.cos(traj.times), atol=1e-8)


def test_zero_field_is_constant():
    x0 = np.array([0.3, -1.0, 2.0])
    for method in ("rk4-fixed", "rk45-adaptive"):
        traj = integrate(lambda x: np.zeros(3), x0, IntegratorConfig(method=method, t_max=1.0, dt=0.1))
        assert np.array_equal(traj.states, np.tile(x0, (len(traj), 1)))


def test_trajectory_invariants_and_recording():
    cfg = IntegratorConfig(method="rk4-fixed", t_max=1.0, dt=0.01, record_every=7)
    traj = integrate(oscillator, [1, 0], cfg, {"E": lambda x: 0.5 * (x @ x)})
    assert np.all(np.diff(traj.times) > 0)
    assert traj.states.shape == (len(traj), 2) and traj.monitors["E"].shape == (len(traj),)
    # initial, every 7th of 100 steps, final
    assert len(traj) == 1 + 100 // 7 + 1 and traj.n_steps == 100
    assert np.isclose(traj.times[1], 0.07) and traj.times[-1] == 1.0
    assert np.array_equal(traj.column(0), traj.states[:, 0])


def test_rk4_single_step_is_quartic_taylor_polynomial():
    """For x' = A x one RK4 step applies sum_{k<=4} (hA)^k / k!."""
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    h, x0 = 0.1, np.array([1.0, 0.3])
    M = sum(np.linalg.matrix_power(h * A, k) / math.factorial(k) for k in range(5))
    assert np.allclose(rk4_step(lambda x: A @ x, x0, h), M @ x0, atol=1e-16)


def test_rk4_convergence_order():
    est = convergence_order(oscillator, [1, 0], [1e-2, 5e-3, 2.5e-3])
    assert not est.exact and 3.7 <= est.order <= 4.3


def test_linear_field_is_exact():
    est = convergence_order(lambda x: np.array([2.0, -1.0]), [0, 0], [0.1, 0.05, 0.025])
    assert est.exact and est.order == float("inf")


def test_convergence_order_needs_three_steps():
    with pytest.raises(ValueError):
        convergence_order(oscillator, [1, 0], [0.1, 0.05])


def test_adaptive_tolerance_proportionality():
    exact = lambda t: np.array([np.cos(t), -np.sin(t)])
    slope = tolerance_slope(oscillator, [1, 0], exact, [1e-6, 1e-7, 1e-8, 1e-9, 1e-10], t_end=10.0)
    assert 0.7 <= slope <= 1.3


def test_rk4_energy_drift_frozen_slow():
    """eps = 0, Q frozen at its initial value by removing the back-reaction row."""
    w = np.sqrt(2.0)
    X = lambda x: np.array([x[1], -w**2 * x[0]])
    traj = integrate(X, [1, 0], IntegratorConfig(method="rk4-fixed", t_max=10.0, dt=1e-3, record_every=100),
                     {"E": lambda x: 0.5 * (x[1] ** 2 + w**2 * x[0] ** 2)})
    E = traj.monitors["E"]
    assert traj.n_steps == 10_000
    assert np.max(np.abs(E - E[0])) / E[0] <= 1e-6


def test_clock_coordinates_advance_linearly():
    model = fs.case_b_model(0.05)
    for method in ("rk4-fixed", "rk45-adaptive"):
        traj = integrate(fs.full_field(model), fs.REFERENCE_X0,
                         IntegratorConfig(method=method, t_max=20.0, dt=0.01, rtol=1e-10, atol=1e-12))
        assert np.allclose(traj.states[:, fs.T], traj.times, atol=1e-9)
        assert np.allclose(traj.states[:, fs.TAU], 0.05 * traj.times, atol=1e-9)


def test_non_finite_state():
    with pytest.raises(NonFiniteState):
        integrate(lambda x: np.array([np.nan]), [1.0], IntegratorConfig(method="rk4-fixed", dt=0.1))
    with pytest.raises(NonFiniteState):
        integrate(lambda x: x, [np.inf], IntegratorConfig())


def test_step_size_underflow():
    # blow-up at s = 1: x' = x^2 from x0 = 1
    with pytest.raises((StepSizeUnderflow, NonFiniteState)):
        integrate(lambda x: x**2, [1.0], IntegratorConfig(t_max=2.0))
    with pytest.raises(StepSizeUnderflow):
        integrate(lambda x: np.array([1.0 / (1.0 - x[0]) ** 3]), [0.0], IntegratorConfig(t_max=2.0))


def test_adaptive_records_every_kth_step_and_final():
    traj = integrate(oscillator, [1, 0], IntegratorConfig(t_max=5.0, record_every=3))
    assert traj.times[0] == 0 and traj.times[-1] == 5.0
    assert len(traj) == 1 + traj.n_steps // 3 + (traj.n_steps % 3 != 0)


@given(lam=st.floats(-2, 2), x0=st.floats(-3, 3))
def test_linear_decay_property(lam, x0):
    traj = integrate(lambda x: lam * x, [x0], IntegratorConfig(t_max=1.0, rtol=1e-10, atol=1e-12))
    assert abs(traj.states[-1, 0] - x0 * np.exp(lam)) <= 1e-8 * max(1, abs(x0) * np.exp(lam))


@given(dt=st.sampled_from([0.1, 0.05, 0.02]), t_max=st.floats(0.5, 3.0))
def test_fixed_step_ends_at_t_max_property(dt, t_max):
    traj = integrate(oscillator, [1, 0], IntegratorConfig(method="rk4-fixed", t_max=t_max, dt=dt))
    assert traj.times[-1] == t_max
    assert np.all(np.diff(traj.times) > 0)
