"""Symplectization of a q-cosymplectic chart onto R^q x M.

Extended coordinates are ``(s_1..s_q, x_1..x_dim)``.  The symplectic form is
``pr*omega + sum_i pr*lambda_i ^ ds_i``; with the contraction convention
``i_v omega = W^T v`` this orientation makes the extended Reeb fields the
Hamiltonian fields of the ``s_i`` (``i_{R_i} omega_hat = ds_i``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (DEFAULT_FD, FDConfig, QCosymplecticStructure, ScalarField, TwoFormField,
                       exterior_derivative_2form, poisson_bracket, sharp)


@dataclass
class SymplecticStructure:
    base: QCosymplecticStructure
    omega_hat: TwoFormField

    @property
    def q(self) -> int:
        return self.base.chart.q

    @property
    def dim(self) -> int:
        return self.base.dim + self.q

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f"s{i + 1}" for i in range(self.q)) + self.base.chart.names

    def project(self, y) -> np.ndarray:
        return np.asarray(y, dtype=float)[self.q:]

    def lift(self, x, s=None) -> np.ndarray:
        s = np.zeros(self.q) if s is None else np.asarray(s, dtype=float)
        return np.concatenate([s, np.asarray(x, dtype=float)])

    def pullback(self, f: ScalarField) -> ScalarField:
        """``f o pr`` on the extended space."""
        q = self.q
        grad = None
        if f.grad is not None:
            grad = lambda y: np.concatenate([np.zeros(q), f.d(y[q:])])
        return ScalarField(lambda y: f.fn(y[q:]), grad)

    def hamiltonian_vector(self, F: ScalarField, y, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
        """Solve ``i_X omega_hat = dF``."""
        y = np.asarray(y, dtype=float)
        return np.linalg.solve(self.omega_hat(y).T, F.d(y, cfg))

    def bracket(self, F: ScalarField, K: ScalarField, y, cfg: FDConfig = DEFAULT_FD) -> float:
        """``{F, K} = omega_hat(X_F, X_K)``."""
        y = np.asarray(y, dtype=float)
        W = self.omega_hat(y)
        return float(self.hamiltonian_vector(F, y, cfg) @ W @ self.hamiltonian_vector(K, y, cfg))


def symplectize(s: QCosymplecticStructure, points=None) -> SymplecticStructure:
    """Assemble ``omega_hat``; if ``points`` are given, ``B`` is checked there first."""
    if points is not None:
        for x in np.atleast_2d(points):
            sharp(s, np.zeros(s.dim), x)  # raises SingularMusicalMatrix
    q = s.chart.q

    def W_hat(y):
        x = y[q:]
        L = s.lambda_matrix(x)
        out = np.zeros((q + s.dim, q + s.dim))
        out[q:, q:] = s.omega(x)
        out[q:, :q] = L.T
        out[:q, q:] = -L
        return out

    return SymplecticStructure(s, TwoFormField(W_hat))


def check_poisson_morphism(sym: SymplecticStructure, f: ScalarField, k: ScalarField, points,
                           tol: float = 1e-8) -> bool:
    """``{f o pr, k o pr}`` upstairs equals ``{f, k} o pr`` at every extended point."""
    F, K = sym.pullback(f), sym.pullback(k)
    for y in np.atleast_2d(points):
        up = sym.bracket(F, K, y, sym.base.fd)
        down = poisson_bracket(sym.base, f, k, sym.project(y))
        if abs(up - down) > tol:
            return False
    return True


def extended_reeb_residual(sym: SymplecticStructure, y) -> float:
    y = np.asarray(y, dtype=float)
    q = sym.q
    R = sym.base.reeb_matrix(sym.project(y))
    W = sym.omega_hat(y)
    worst = 0.0
    for i in range(q):
        R_hat = np.concatenate([np.zeros(q), R[:, i]])
        ds = np.zeros(sym.dim)
        ds[i] = 1.0
        worst = max(worst, float(np.max(np.abs(W.T @ R_hat - ds))))
    return worst


def extended_reeb_check(sym: SymplecticStructure, points, tol: float = 1e-10) -> bool:
    """True iff ``i_{R_i} omega_hat = ds_i`` at every point."""
    return all(extended_reeb_residual(sym, y) <= tol for y in np.atleast_2d(points))


def closedness_residual(sym: SymplecticStructure, y, step: float = DEFAULT_FD.step) -> float:
    return float(np.max(np.abs(exterior_derivative_2form(sym.omega_hat, y, step))))
