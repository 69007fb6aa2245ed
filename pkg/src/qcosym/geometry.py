"""q-cosymplectic structures in a single coordinate chart.

A structure is a closed 2-form ``omega`` and ``q`` closed 1-forms ``lambdas`` on
a chart of dimension ``2n + q``.  All derived objects are computed pointwise
from the musical matrix

    B = W^T + sum_i lambda_i lambda_i^T,     W[a, b] = omega(e_a, e_b),

so that ``(B v)_a = omega(v, e_a) + sum_i lambda_i(v) lambda_i[a]``.  With this
convention the standard structure ``omega = dq^dp``, ``lambda = dz`` on
``(q, p, z)`` gives ``B = [[0, -1, 0], [1, 0, 0], [0, 0, 1]]`` and the
Hamiltonian field of ``p`` is ``d/dq``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.linalg.lapack import dgecon


class SingularMusicalMatrix(ValueError):
    """The musical matrix is (numerically) singular at the requested point."""


class ReebInvarianceViolated(ValueError):
    """A deforming function is not a first integral of every Reeb field."""


@dataclass(frozen=True)
class FDConfig:
    step: float = 1e-5
    tol_closed: float = 1e-6
    tol_linear: float = 1e-10
    cond_max: float = 1e12

    def __post_init__(self):
        for name in ("step", "tol_closed", "tol_linear", "cond_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"FDConfig.{name} must be strictly positive")


DEFAULT_FD = FDConfig()


# finite differences ----------------------------------------------------------

def _steps(x: np.ndarray, step: float) -> np.ndarray:
    return step * np.maximum(1.0, np.abs(x))


def fd_gradient(fn: Callable, x, step: float = DEFAULT_FD.step) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    h = _steps(x, step)
    g = np.empty_like(x)
    for a in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[a] += h[a]
        xm[a] -= h[a]
        g[a] = (fn(xp) - fn(xm)) / (2.0 * h[a])
    return g


def fd_jacobian(fn: Callable, x, step: float = DEFAULT_FD.step) -> np.ndarray:
    """Central-difference derivative of an array-valued function.

    Returns an array ``D`` with ``D[..., a] = d fn / d x_a``; for a vector
    field this is the usual Jacobian ``J[i, a] = d X^i / d x^a``.
    """
    x = np.asarray(x, dtype=float)
    h = _steps(x, step)
    cols = []
    for a in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[a] += h[a]
        xm[a] -= h[a]
        cols.append((np.asarray(fn(xp), dtype=float) - np.asarray(fn(xm), dtype=float)) / (2.0 * h[a]))
    return np.stack(cols, axis=-1)


def exterior_derivative_1form(form: Callable, x, step: float = DEFAULT_FD.step) -> np.ndarray:
    """Components ``d_a l_b - d_b l_a`` of the differential of a 1-form."""
    J = fd_jacobian(form, x, step)  # J[b, a] = d_a l_b
    return J.T - J


def exterior_derivative_2form(form: Callable, x, step: float = DEFAULT_FD.step) -> np.ndarray:
    """Cyclic sums ``d_a W_bc + d_b W_ca + d_c W_ab`` of a 2-form."""
    D = np.moveaxis(fd_jacobian(form, x, step), -1, 0)  # D[a, b, c] = d_a W_bc
    return D + np.transpose(D, (1, 2, 0)) + np.transpose(D, (2, 0, 1))


# fields ----------------------------------------------------------------------

@dataclass(frozen=True)
class Chart:
    n: int
    q: int
    names: tuple[str, ...]

    def __post_init__(self):
        if self.n < 1 or self.q < 1:
            raise ValueError("n and q must be positive integers")
        if len(self.names) != self.dim:
            raise ValueError(f"expected {self.dim} coordinate names, got {len(self.names)}")
        if len(set(self.names)) != len(self.names):
            raise ValueError("coordinate names must be pairwise distinct")

    @property
    def dim(self) -> int:
        return 2 * self.n + self.q

    def index(self, name: str) -> int:
        return self.names.index(name)


@dataclass(frozen=True)
class ScalarField:
    """A function on the chart with an optional analytic gradient."""

    fn: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, x) -> float:
        return float(self.fn(np.asarray(x, dtype=float)))

    def d(self, x, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.grad is not None:
            return np.asarray(self.grad(x), dtype=float)
        return fd_gradient(self.fn, x, cfg.step)

    def __add__(self, other: ScalarField) -> ScalarField:
        grad = None
        if self.grad is not None and other.grad is not None:
            grad = lambda x: self.d(x) + other.d(x)
        return ScalarField(lambda x: self.fn(x) + other.fn(x), grad)

    def __mul__(self, other: ScalarField) -> ScalarField:
        grad = None
        if self.grad is not None and other.grad is not None:
            grad = lambda x: self.fn(x) * other.d(x) + other.fn(x) * self.d(x)
        return ScalarField(lambda x: self.fn(x) * other.fn(x), grad)

    @classmethod
    def coordinate(cls, index: int, dim: int) -> ScalarField:
        e = np.zeros(dim)
        e[index] = 1.0
        return cls(lambda x: x[index], lambda x: e.copy())

    @classmethod
    def constant(cls, value: float, dim: int) -> ScalarField:
        return cls(lambda x: value, lambda x: np.zeros(dim))


@dataclass(frozen=True)
class OneFormField:
    fn: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)

    @classmethod
    def constant(cls, components) -> OneFormField:
        c = np.asarray(components, dtype=float)
        return cls(lambda x: c.copy())


@dataclass(frozen=True)
class TwoFormField:
    """Antisymmetric matrix field ``W[a, b] = omega(e_a, e_b)``."""

    fn: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)

    @classmethod
    def constant(cls, matrix) -> TwoFormField:
        W = np.asarray(matrix, dtype=float)
        return cls(lambda x: W.copy())


@dataclass(frozen=True)
class VectorField:
    fn: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)


def wedge(alpha, beta) -> np.ndarray:
    """Component matrix of ``alpha ^ beta`` for two covectors."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    return np.outer(alpha, beta) - np.outer(beta, alpha)


@dataclass
class QCosymplecticStructure:
    chart: Chart
    omega: TwoFormField
    lambdas: tuple[OneFormField, ...]
    fd: FDConfig = DEFAULT_FD
    _reeb: list[VectorField] | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.lambdas = tuple(self.lambdas)
        if len(self.lambdas) != self.chart.q:
            raise ValueError(f"expected {self.chart.q} one-forms, got {len(self.lambdas)}")

    @property
    def dim(self) -> int:
        return self.chart.dim

    def lambda_matrix(self, x) -> np.ndarray:
        """Rows are the 1-forms evaluated at ``x``; shape ``(q, dim)``."""
        return np.stack([lam(x) for lam in self.lambdas])

    def reeb_fields(self) -> list[VectorField]:
        if self._reeb is None:
            self._reeb = [VectorField(_reeb_component(self, i)) for i in range(self.chart.q)]
        return self._reeb

    def reeb_matrix(self, x) -> np.ndarray:
        """Reeb vectors at ``x`` as columns; a single factorization of ``B``."""
        return _Musical(self, x).solve(self.lambda_matrix(x).T)


def standard_structure(n: int, q: int) -> QCosymplecticStructure:
    """``sum_j dq_j ^ dp_j`` and ``dz_i`` on ``(q_1..q_n, p_1..p_n, z_1..z_q)``."""
    names = tuple([f"q{j + 1}" for j in range(n)] + [f"p{j + 1}" for j in range(n)]
                  + [f"z{i + 1}" for i in range(q)])
    dim = 2 * n + q
    W = np.zeros((dim, dim))
    for j in range(n):
        W[j, n + j] = 1.0
        W[n + j, j] = -1.0
    lambdas = []
    for i in range(q):
        e = np.zeros(dim)
        e[2 * n + i] = 1.0
        lambdas.append(OneFormField.constant(e))
    return QCosymplecticStructure(Chart(n, q, names), TwoFormField.constant(W), tuple(lambdas))


def sample_points(dim: int, count: int = 64, seed: int = 0, box=(-2.0, 2.0)) -> np.ndarray:
    """Seeded uniform points in a box; ``box`` is ``(lo, hi)`` or per-coordinate arrays."""
    lo, hi = box
    rng = np.random.default_rng(seed)
    return rng.uniform(lo, hi, size=(count, dim))


# musical matrix ----------------------------------------------------------------

def musical_matrix(s: QCosymplecticStructure, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    W = s.omega(x)
    L = s.lambda_matrix(x)
    return W.T + L.T @ L


class _Musical:
    """LU factorization of ``B`` at one point, with a conditioning guard."""

    def __init__(self, s: QCosymplecticStructure, x):
        B = musical_matrix(s, x)
        anorm = np.linalg.norm(B, 1)
        with warnings.catch_warnings():
            # exact singularity is reported through the condition estimate below
            warnings.simplefilter("ignore", LinAlgWarning)
            lu, piv = lu_factor(B, check_finite=True)
        rcond, _ = dgecon(lu, anorm, norm="1")
        if not rcond > 0 or 1.0 / rcond > s.fd.cond_max:
            cond = np.inf if rcond <= 0 else 1.0 / rcond
            raise SingularMusicalMatrix(f"musical matrix condition {cond:.3g} exceeds {s.fd.cond_max:.3g}")
        self.lu = (lu, piv)

    def solve(self, rhs) -> np.ndarray:
        return lu_solve(self.lu, rhs)


def flat(s: QCosymplecticStructure, v, x) -> np.ndarray:
    """The musical map applied to a tangent vector ``v`` at ``x``."""
    return musical_matrix(s, x) @ np.asarray(v, dtype=float)


def sharp(s: QCosymplecticStructure, covector, x) -> np.ndarray:
    """Inverse musical map; raises SingularMusicalMatrix on degenerate ``B``."""
    return _Musical(s, x).solve(np.asarray(covector, dtype=float))


def contract(s: QCosymplecticStructure, v, x) -> np.ndarray:
    """``i_v omega`` at ``x``."""
    return s.omega(x).T @ np.asarray(v, dtype=float)


def _reeb_component(s: QCosymplecticStructure, i: int):
    def R(x):
        return sharp(s, s.lambdas[i](x), x)
    return R


def reeb_fields(s: QCosymplecticStructure) -> list[VectorField]:
    return s.reeb_fields()


# derived vector fields ---------------------------------------------------------

def reeb_derivatives(s: QCosymplecticStructure, f: ScalarField, x) -> np.ndarray:
    """The values ``R_i(f)(x)`` for all Reeb fields."""
    return f.d(x, s.fd) @ s.reeb_matrix(x)


def gradient_field(s: QCosymplecticStructure, f: ScalarField) -> VectorField:
    return VectorField(lambda x: sharp(s, f.d(x, s.fd), x))


def _hamiltonian_solve(m: _Musical, L: np.ndarray, df: np.ndarray) -> np.ndarray:
    Rf = df @ m.solve(L.T)
    return m.solve(df - Rf @ L)


def hamiltonian_vector(s: QCosymplecticStructure, f: ScalarField, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return _hamiltonian_solve(_Musical(s, x), s.lambda_matrix(x), f.d(x, s.fd))


def hamiltonian_field(s: QCosymplecticStructure, f: ScalarField) -> VectorField:
    return VectorField(lambda x: hamiltonian_vector(s, f, x))


def evolution_field(s: QCosymplecticStructure, f: ScalarField, weights=None) -> VectorField:
    """Weighted evolution field ``sum_i w_i R_i + X_f`` (all-ones by default)."""
    w = np.ones(s.chart.q) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (s.chart.q,):
        raise ValueError(f"weights must have length {s.chart.q}")

    def E(x):
        x = np.asarray(x, dtype=float)
        return s.reeb_matrix(x) @ w + hamiltonian_vector(s, f, x)
    return VectorField(E)


def poisson_bracket(s: QCosymplecticStructure, f: ScalarField, g: ScalarField, x) -> float:
    """``{f, g} = omega(X_f, X_g)``.

    Evaluated as ``(X_g(f) - X_f(g)) / 2``; both terms equal ``{f, g}`` and
    the difference form makes ``{g, f} = -{f, g}`` hold bit for bit.
    """
    x = np.asarray(x, dtype=float)
    m = _Musical(s, x)
    L = s.lambda_matrix(x)
    df, dg = f.d(x, s.fd), g.d(x, s.fd)
    return 0.5 * (float(df @ _hamiltonian_solve(m, L, dg)) - float(dg @ _hamiltonian_solve(m, L, df)))


def bracket_function(s: QCosymplecticStructure, f: ScalarField, g: ScalarField) -> ScalarField:
    """``{f, g}`` as a scalar field (finite-difference gradient)."""
    return ScalarField(lambda x: poisson_bracket(s, f, g, x))


def lie_bracket(X: Callable, Y: Callable, x, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """``[X, Y](x) = J_Y X - J_X Y`` with central-difference Jacobians."""
    x = np.asarray(x, dtype=float)
    JX = fd_jacobian(X, x, cfg.step)
    JY = fd_jacobian(Y, x, cfg.step)
    return JY @ np.asarray(X(x)) - JX @ np.asarray(Y(x))


def lie_derivative_1form(form: Callable, X: Callable, x, step: float = DEFAULT_FD.step) -> np.ndarray:
    """``(L_X l)_b = X^a d_a l_b + l_a d_b X^a``."""
    x = np.asarray(x, dtype=float)
    Jl = fd_jacobian(form, x, step)
    JX = fd_jacobian(X, x, step)
    return Jl @ np.asarray(X(x)) + JX.T @ np.asarray(form(x))


def lie_derivative_2form(form: Callable, X: Callable, x, step: float = DEFAULT_FD.step) -> np.ndarray:
    """``(L_X W)_bc = X^a d_a W_bc + W_ac d_b X^a + W_ba d_c X^a``."""
    x = np.asarray(x, dtype=float)
    DW = fd_jacobian(form, x, step)
    JX = fd_jacobian(X, x, step)
    W = np.asarray(form(x))
    return DW @ np.asarray(X(x)) + JX.T @ W + W @ JX


def check_automorphism(s: QCosymplecticStructure, X: Callable, points, cfg: FDConfig = DEFAULT_FD) -> bool:
    """True iff ``L_X omega`` and every ``L_X lambda_i`` vanish at all points."""
    for x in np.atleast_2d(points):
        if np.max(np.abs(lie_derivative_2form(s.omega, X, x, cfg.step))) > cfg.tol_closed:
            return False
        for lam in s.lambdas:
            if np.max(np.abs(lie_derivative_1form(lam, X, x, cfg.step))) > cfg.tol_closed:
                return False
    return True


def is_local_gradient(s: QCosymplecticStructure, X: Callable, points, cfg: FDConfig = DEFAULT_FD) -> bool:
    """True iff the covector field ``B X`` is closed at all points."""
    covector = lambda y: flat(s, X(y), y)
    for x in np.atleast_2d(points):
        if np.max(np.abs(exterior_derivative_1form(covector, x, cfg.step))) > cfg.tol_closed:
            return False
    return True


def deform_structure(s: QCosymplecticStructure, hprime: ScalarField, points,
                     cfg: FDConfig = DEFAULT_FD) -> QCosymplecticStructure:
    """Structure with ``omega' = omega + dH' ^ sum_i lambda_i``.

    Requires ``R_i(H') = 0``; this is checked at ``points`` and
    ReebInvarianceViolated is raised otherwise.
    """
    for x in np.atleast_2d(points):
        Rh = reeb_derivatives(s, hprime, x)
        if np.max(np.abs(Rh)) > cfg.tol_linear:
            raise ReebInvarianceViolated(f"R_i(H') = {Rh} at {x}")

    def W(x):
        lam_sum = s.lambda_matrix(x).sum(axis=0)
        return s.omega(x) + wedge(hprime.d(x, s.fd), lam_sum)

    return QCosymplecticStructure(s.chart, TwoFormField(W), s.lambdas, s.fd)


# validation --------------------------------------------------------------------

@dataclass
class CheckResult:
    passed: bool
    value: float

    def to_dict(self) -> dict:
        value = float(self.value)
        return {"passed": bool(self.passed), "value": value if np.isfinite(value) else None}


@dataclass
class PointReport:
    point: np.ndarray
    checks: dict[str, CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())


@dataclass
class ValidationReport:
    points: list[PointReport]

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.points)

    def failures(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for p in self.points:
            for name, c in p.checks.items():
                if not c.passed:
                    out[name] = out.get(name, 0) + 1
        return out

    def check_passed(self, name: str) -> bool:
        return all(p.checks[name].passed for p in self.points)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "failures": self.failures(),
            "points": [{"point": [float(v) for v in p.point], "passed": p.passed,
                        "checks": {k: c.to_dict() for k, c in p.checks.items()}}
                       for p in self.points],
        }


CHECK_NAMES = ("antisymmetry", "rank", "lambda_independence", "lambda_closed",
               "omega_closed", "musical_invertible", "reeb_relations")


def _validate_point(s: QCosymplecticStructure, x: np.ndarray, cfg: FDConfig) -> PointReport:
    n, q = s.chart.n, s.chart.q
    W = s.omega(x)
    L = s.lambda_matrix(x)
    scale = max(1.0, np.max(np.abs(W)))
    checks: dict[str, CheckResult] = {}

    asym = float(np.max(np.abs(W + W.T)))
    checks["antisymmetry"] = CheckResult(asym <= cfg.tol_linear * scale, asym)

    sv = np.linalg.svd(W, compute_uv=False)
    rank = int(np.sum(sv > cfg.tol_linear * scale))
    checks["rank"] = CheckResult(rank == 2 * n, rank)

    lsv = np.linalg.svd(L, compute_uv=False)
    checks["lambda_independence"] = CheckResult(lsv[-1] > cfg.tol_linear, float(lsv[-1]))

    dl = max(float(np.max(np.abs(exterior_derivative_1form(lam, x, cfg.step)))) for lam in s.lambdas)
    checks["lambda_closed"] = CheckResult(dl <= cfg.tol_closed, dl)

    dW = float(np.max(np.abs(exterior_derivative_2form(s.omega, x, cfg.step))))
    checks["omega_closed"] = CheckResult(dW <= cfg.tol_closed, dW)

    B = W.T + L.T @ L
    cond = float(np.linalg.cond(B, 1))
    invertible = np.isfinite(cond) and cond <= cfg.cond_max
    checks["musical_invertible"] = CheckResult(invertible, cond)

    if invertible:
        R = np.linalg.solve(B, L.T)
        resid = max(float(np.max(np.abs(W.T @ R))), float(np.max(np.abs(L @ R - np.eye(q)))))
        checks["reeb_relations"] = CheckResult(resid <= cfg.tol_linear * scale, resid)
    else:
        checks["reeb_relations"] = CheckResult(False, np.inf)
    return PointReport(np.array(x, dtype=float), checks)


def validate_structure(s: QCosymplecticStructure, sample_points, cfg: FDConfig = DEFAULT_FD) -> ValidationReport:
    """Check the structure axioms at each sample point; never raises on failure."""
    pts = np.atleast_2d(np.asarray(sample_points, dtype=float))
    if pts.shape[0] == 0:
        raise ValueError("at least one sample point is required")
    return ValidationReport([_validate_point(s, x, cfg) for x in pts])
