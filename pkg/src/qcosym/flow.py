"""Integral curves of vector fields with monitored first integrals."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np


class StepSizeUnderflow(RuntimeError):
    pass


class NonFiniteState(RuntimeError):
    pass


METHODS = ("rk4-fixed", "rk45-adaptive")


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk45-adaptive"
    t_max: float = 1.0
    dt: float = 1e-2
    rtol: float = 1e-9
    atol: float = 1e-12
    record_every: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if not 0 < self.dt < self.t_max:
            raise ValueError("dt must satisfy 0 < dt < t_max")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("tolerances must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be a positive integer")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    monitors: dict[str, np.ndarray] = field(default_factory=dict)
    n_steps: int = 0
    n_rejected: int = 0

    def __len__(self) -> int:
        return len(self.times)

    def column(self, index: int) -> np.ndarray:
        return self.states[:, index]


class _Recorder:
    def __init__(self, monitors: Mapping[str, Callable]):
        self.monitors = dict(monitors)
        self.times: list[float] = []
        self.states: list[np.ndarray] = []
        self.values: dict[str, list[float]] = {k: [] for k in self.monitors}

    def __call__(self, s: float, x: np.ndarray):
        self.times.append(s)
        self.states.append(x.copy())
        for k, m in self.monitors.items():
            self.values[k].append(float(m(x)))

    def trajectory(self, n_steps: int, n_rejected: int = 0) -> Trajectory:
        return Trajectory(np.array(self.times), np.array(self.states),
                          {k: np.array(v) for k, v in self.values.items()}, n_steps, n_rejected)


def _check_finite(x: np.ndarray, s: float):
    if not np.all(np.isfinite(x)):
        raise NonFiniteState(f"non-finite state at s = {s}")


def rk4_step(f: Callable, x: np.ndarray, h: float) -> np.ndarray:
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# Dormand-Prince 5(4)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def dopri5_step(f: Callable, x: np.ndarray, h: float, k1: np.ndarray):
    """One Dormand-Prince step; returns (x_new, error_vector, f(x_new))."""
    K = [k1]
    for i in range(1, 7):
        xi = x + h * sum(a * k for a, k in zip(_A[i], K) if a != 0.0)
        K.append(f(xi))
    # the 7th stage is evaluated at the 5th-order solution (FSAL)
    x_new = x + h * sum(b * k for b, k in zip(_B5, K) if b != 0.0)
    err = h * sum(e * k for e, k in zip(_E, K))
    return x_new, err, K[6]


def _error_norm(err, x, x_new, rtol, atol) -> float:
    scale = atol + rtol * np.maximum(np.abs(x), np.abs(x_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(f, x, f0, rtol, atol, t_max) -> float:
    # Hairer-Norsett-Wanner starting step heuristic (order 5)
    scale = atol + rtol * np.abs(x)
    d0 = np.sqrt(np.mean((x / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, t_max)
    f1 = f(x + h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, t_max)


def integrate(X: Callable, x0, cfg: IntegratorConfig, monitors: Mapping[str, Callable] | None = None) -> Trajectory:
    """Integrate ``dx/ds = X(x)`` from ``s = 0`` to ``cfg.t_max``.

    Samples are recorded at the initial point, every ``record_every``-th
    accepted step, and at the final point.
    """
    f = lambda y: np.asarray(X(y), dtype=float)
    x = np.array(x0, dtype=float)
    _check_finite(x, 0.0)
    rec = _Recorder(monitors or {})
    rec(0.0, x)
    if cfg.method == "rk4-fixed":
        return _integrate_rk4(f, x, cfg, rec)
    return _integrate_dopri(f, x, cfg, rec)


def _integrate_rk4(f, x, cfg: IntegratorConfig, rec: _Recorder) -> Trajectory:
    n = int(np.ceil(cfg.t_max / cfg.dt - 1e-9))
    for k in range(1, n + 1):
        # s is recomputed from k so recorded times carry no accumulated rounding
        s_prev = (k - 1) * cfg.dt
        s = min(k * cfg.dt, cfg.t_max) if k < n else cfg.t_max
        x = rk4_step(f, x, s - s_prev)
        _check_finite(x, s)
        if k % cfg.record_every == 0 or k == n:
            rec(s, x)
    return rec.trajectory(n)


def _integrate_dopri(f, x, cfg: IntegratorConfig, rec: _Recorder) -> Trajectory:
    t_max = cfg.t_max
    h_min = 1e-14 * t_max
    beta = 0.04
    alpha = 0.2 - 0.75 * beta
    safety, fac_min, fac_max = 0.9, 0.2, 10.0

    s = 0.0
    k1 = f(x)
    h = _initial_step(f, x, k1, cfg.rtol, cfg.atol, t_max)
    err_prev = 1e-4
    accepted = rejected = 0
    last_recorded = 0
    while s < t_max:
        if t_max - s <= h:
            h = t_max - s
        x_new, err_vec, k_new = dopri5_step(f, x, h, k1)
        if not np.all(np.isfinite(x_new)):
            raise NonFiniteState(f"non-finite state at s = {s + h}")
        err = _error_norm(err_vec, x, x_new, cfg.rtol, cfg.atol)
        if err <= 1.0:
            s = t_max if t_max - s <= h else s + h
            x, k1 = x_new, k_new
            accepted += 1
            if accepted % cfg.record_every == 0:
                rec(s, x)
                last_recorded = accepted
            err = max(err, 1e-10)
            fac = safety * err ** (-alpha) * err_prev ** beta
            h *= min(fac_max, max(fac_min, fac))
            err_prev = err
        else:
            rejected += 1
            h *= max(fac_min, safety * err ** (-alpha))
        if h < h_min and s < t_max:
            raise StepSizeUnderflow(f"step {h:.3g} below {h_min:.3g} at s = {s}")
    if last_recorded != accepted:
        rec(s, x)
    return rec.trajectory(accepted, rejected)


@dataclass
class OrderEstimate:
    order: float
    exact: bool
    differences: np.ndarray


def convergence_order(X: Callable, x0, dt_list, t_end: float = 1.0, exact_tol: float = 1e-13) -> OrderEstimate:
    """Observed global order of fixed-step RK4 from successive refinements.

    ``dt_list`` needs at least three step sizes, each dividing ``t_end``.
    With solutions ``y_k`` at decreasing steps ``h_k``, the differences
    ``|y_k - y_{k+1}|`` shrink like ``h_k^p``; each consecutive pair of
    differences yields one estimate of ``p`` and the mean is returned.
    """
    dts = sorted((float(d) for d in dt_list), reverse=True)
    if len(dts) < 3:
        raise ValueError("at least three step sizes are required")
    finals = []
    for dt in dts:
        cfg = IntegratorConfig(method="rk4-fixed", t_max=t_end, dt=dt, record_every=10**9)
        finals.append(integrate(X, x0, cfg).states[-1])
    diffs = np.array([np.max(np.abs(finals[k] - finals[k + 1])) for k in range(len(finals) - 1)])
    scale = max(1.0, float(np.max(np.abs(finals[-1]))))
    if np.all(diffs <= exact_tol * scale):
        return OrderEstimate(float("inf"), True, diffs)
    orders = [np.log(diffs[k] / diffs[k + 1]) / np.log(dts[k] / dts[k + 1]) for k in range(len(diffs) - 1)]
    return OrderEstimate(float(np.mean(orders)), False, diffs)


def tolerance_slope(X: Callable, x0, exact: Callable, rtols, t_end: float) -> float:
    """Log-log slope of the adaptive integrator's final error against ``rtol``."""
    errs = []
    for rtol in rtols:
        cfg = IntegratorConfig(method="rk45-adaptive", t_max=t_end, dt=min(1e-2, t_end / 2),
                               rtol=rtol, atol=rtol * 1e-3, record_every=10**9)
        errs.append(np.max(np.abs(integrate(X, x0, cfg).states[-1] - exact(t_end))))
    return float(np.polyfit(np.log(rtols), np.log(errs), 1)[0])
