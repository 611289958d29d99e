"""Iteration maps ``x_{k+1} = x_k - step_k`` and the outer run loop.

Each ``*_step`` function returns the step ``g`` (the iterate moves to
``x - g``).  The optimal-control family uses a growing exponent: at outer
iteration ``k`` the contraction matrix is raised to ``k + 1`` (capped by
``horizon_cap`` when given).  A cap of ``c`` turns the superlinear rate into a
linear one with factor ``rho**c``.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .differentiation import (
    AllColumnsDegenerate,
    DifferencePair,
    NonFiniteValue,
    ObjectiveOracle,
    backward_difference_jacobian,
    hessian_diagonal,
)
from .linalg import (
    LinalgError,
    NoConvergence,
    as_matrix,
    as_vector,
    geometric_sum_apply,
    is_symmetric_pd,
    lu_factor,
    lu_solve,
    matrix_power,
    spectral_radius,
)

Weight = Union[float, np.ndarray]

M_MAX = 1e4
LAMBDA_FLOOR = 1e-8
THETA = 0.5
CURVATURE_FLOOR = 1e-8


class Algorithm(str, enum.Enum):
    GRADIENT_DESCENT = "gd"
    NEWTON = "newton"
    FINITE_HORIZON = "finite-horizon"
    ALG1 = "alg1"
    ALG2_CLOSED = "alg2-closed"
    ALG2_RECURSIVE = "alg2-recursive"
    ALG3 = "alg3"
    ALG4 = "alg4"


class InnerMode(str, enum.Enum):
    UNROLLED = "unrolled"
    STREAMING = "streaming"


REQUIRED_PARAMS = {
    Algorithm.GRADIENT_DESCENT: {"gd_step"},
    Algorithm.NEWTON: set(),
    Algorithm.FINITE_HORIZON: {"R", "n_horizon"},
    Algorithm.ALG1: {"R"},
    Algorithm.ALG2_CLOSED: {"M"},
    Algorithm.ALG2_RECURSIVE: {"M"},
    Algorithm.ALG3: {"D"},
    Algorithm.ALG4: {"D"},
}
ALGORITHM_PARAMS = ("R", "M", "D", "gd_step", "n_horizon")


class HorizonExceeded(RuntimeError):
    pass


class ParameterWarning(UserWarning):
    pass


class NumericalFailure(RuntimeError):
    """A stepper error raised out of :func:`run` in strict mode."""

    def __init__(self, cause: BaseException, trace: "Trace"):
        super().__init__(f"{type(cause).__name__}: {cause}")
        self.cause = cause
        self.trace = trace


def expand_weight(w: Weight, n: int) -> np.ndarray:
    """Scalar ``w`` means ``w * I``; a 1-D array means ``diag(w)``."""
    arr = np.asarray(w, dtype=float)
    if arr.ndim == 0:
        return float(arr) * np.eye(n)
    if arr.ndim == 1:
        if arr.size != n:
            raise ValueError(f"diagonal weight has length {arr.size}, expected {n}")
        return np.diag(arr)
    mat = as_matrix(arr, square=True)
    if mat.shape[0] != n:
        raise ValueError(f"weight matrix is {mat.shape}, expected {n}x{n}")
    return mat


def expand_diagonal(d: Weight, n: int) -> np.ndarray:
    arr = np.asarray(d, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    arr = arr.reshape(-1)
    if arr.size != n:
        raise ValueError(f"D has length {arr.size}, expected {n}")
    return arr


@dataclass
class StepperConfig:
    algorithm: Algorithm
    R: Optional[Weight] = None
    M: Optional[Weight] = None
    D: Optional[Weight] = None
    gd_step: Optional[float] = None
    n_horizon: Optional[int] = None
    horizon_cap: Optional[int] = None
    grad_tol: float = 1e-10
    step_tol: float = 1e-14
    max_iter: int = 500
    inner_mode: InnerMode = InnerMode.UNROLLED
    guard: float = 1e-12

    def __post_init__(self):
        self.algorithm = Algorithm(self.algorithm)
        self.inner_mode = InnerMode(self.inner_mode)

    def validate(self, n: int) -> "StepperConfig":
        """Raise ``ValueError`` naming the offending field; return ``self``."""
        required = REQUIRED_PARAMS[self.algorithm]
        for name in ALGORITHM_PARAMS:
            present = getattr(self, name) is not None
            if name in required and not present:
                raise ValueError(f"{name}: required by {self.algorithm.value}")
            if name not in required and present:
                raise ValueError(f"{name}: not used by {self.algorithm.value}")
        for name in ("R", "M"):
            if name in required:
                try:
                    mat = expand_weight(getattr(self, name), n)
                except ValueError as exc:
                    raise ValueError(f"{name}: {exc}") from None
                # R = 0 is admitted as the Newton limit of the control weight
                if name == "R" and not np.any(mat):
                    continue
                if not is_symmetric_pd(mat, tol=1e-10):
                    raise ValueError(f"{name}: must be symmetric positive definite")
        if "D" in required:
            try:
                d = expand_diagonal(self.D, n)
            except ValueError as exc:
                raise ValueError(f"D: {exc}") from None
            if not np.all(np.isfinite(d)) or np.any(d <= 0):
                raise ValueError("D: entries must be positive")
        if "gd_step" in required and not (self.gd_step > 0):
            raise ValueError("gd_step: must be positive")
        if "n_horizon" in required and not (int(self.n_horizon) >= 1):
            raise ValueError("n_horizon: must be a positive integer")
        if self.horizon_cap is not None and int(self.horizon_cap) < 1:
            raise ValueError("horizon_cap: must be a positive integer")
        for name in ("grad_tol", "step_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name}: must be positive")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter: must be a positive integer")
        if not self.guard > 0:
            raise ValueError("guard: must be positive")
        return self

    def parameters(self) -> dict:
        """JSON-friendly dict of every resolved setting."""
        out = {"algorithm": self.algorithm.value}
        for name in ALGORITHM_PARAMS:
            val = getattr(self, name)
            if val is not None:
                out[name] = np.asarray(val).tolist()
        out.update(
            horizon_cap=self.horizon_cap,
            grad_tol=self.grad_tol,
            step_tol=self.step_tol,
            max_iter=self.max_iter,
            inner_mode=self.inner_mode.value,
            guard=self.guard,
        )
        return out


def inner_count(k: int, horizon_cap: Optional[int]) -> int:
    """Number of recursion applications ``m`` so the series has ``m + 1`` terms."""
    return k if horizon_cap is None else min(k, int(horizon_cap) - 1)


# --- baselines -------------------------------------------------------------

def gd_step(oracle: ObjectiveOracle, x, cfg: StepperConfig) -> np.ndarray:
    return cfg.gd_step * oracle.grad(x)


def newton_step(oracle: ObjectiveOracle, x) -> np.ndarray:
    return lu_solve(oracle.hess(x), oracle.grad(x))


# --- optimal-control family ------------------------------------------------

def _control_series(hess, grad, r, m):
    # sum_{i=0}^{m} [(R+H)^{-1} R]^i (R+H)^{-1} grad, one factorization of R+H
    lu = lu_factor(r + hess)
    contraction = lu.solve(r)
    return geometric_sum_apply(contraction, np.eye(grad.size), lu.solve(grad), m)


def alg1_step(oracle: ObjectiveOracle, x, k: int, cfg: StepperConfig) -> np.ndarray:
    n = oracle.dimension
    r = expand_weight(cfg.R, n)
    return _control_series(oracle.hess(x), oracle.grad(x), r, inner_count(k, cfg.horizon_cap))


def alg1_closed_step(oracle: ObjectiveOracle, x, k: int, cfg: StepperConfig) -> np.ndarray:
    """``[I - ((R+H)^{-1} R)^{m+1}] H^{-1} grad``; cross-check only, needs H nonsingular."""
    n = oracle.dimension
    hess, grad = oracle.hess(x), oracle.grad(x)
    r = expand_weight(cfg.R, n)
    contraction = lu_solve(r + hess, r)
    m = inner_count(k, cfg.horizon_cap)
    return (np.eye(n) - matrix_power(contraction, m + 1)) @ lu_solve(hess, grad)


def finite_horizon_step(oracle: ObjectiveOracle, x, k: int, cfg: StepperConfig) -> np.ndarray:
    horizon = int(cfg.n_horizon)
    if k > horizon:
        raise HorizonExceeded(f"k={k} exceeds horizon N={horizon}")
    r = expand_weight(cfg.R, oracle.dimension)
    return _control_series(oracle.hess(x), oracle.grad(x), r, horizon - k)


def alg2_closed_step(oracle: ObjectiveOracle, x, k: int, cfg: StepperConfig) -> np.ndarray:
    n = oracle.dimension
    hess, grad = oracle.hess(x), oracle.grad(x)
    m_mat = expand_weight(cfg.M, n)
    m = inner_count(k, cfg.horizon_cap)
    factor = np.eye(n) - matrix_power(np.eye(n) - m_mat @ hess, m + 1)
    return factor @ lu_solve(hess, grad)


def alg2_recursive_step(oracle: ObjectiveOracle, x, k: int, cfg: StepperConfig) -> np.ndarray:
    """Unrolled ``g <- M grad + (I - M H) g`` from ``g = M grad``; no solves with H."""
    n = oracle.dimension
    hess, grad = oracle.hess(x), oracle.grad(x)
    m_mat = expand_weight(cfg.M, n)
    base = m_mat @ grad
    contraction = np.eye(n) - m_mat @ hess
    g = base
    for _ in range(inner_count(k, cfg.horizon_cap)):
        g = base + contraction @ g
    return g


@dataclass(frozen=True)
class Alg3State:
    """What Algorithm III carries between outer iterations."""

    x_prev: Optional[np.ndarray] = None
    grad_prev: Optional[np.ndarray] = None
    step_prev: Optional[np.ndarray] = None


def alg3_step(oracle: ObjectiveOracle, state: Alg3State, x, k: int, cfg: StepperConfig):
    """Returns ``(step, new_state, guarded_columns)``.

    The curvature matrix is the entrywise backward difference between the
    stored iterate and ``x`` (identity at the first iteration or when every
    coordinate stalled).
    """
    n = oracle.dimension
    x = np.asarray(x, dtype=float)
    grad = oracle.grad(x)
    d = expand_diagonal(cfg.D, n)
    guarded: list[int] = []
    if state.x_prev is None or k == 0:
        d1 = np.eye(n)
    else:
        try:
            d1, guarded = backward_difference_jacobian(
                DifferencePair(state.x_prev, state.grad_prev, x, grad), cfg.guard
            )
        except AllColumnsDegenerate:
            d1, guarded = np.eye(n), list(range(n))
    base = d * grad
    contraction = np.eye(n) - d[:, None] * d1
    if cfg.inner_mode is InnerMode.UNROLLED:
        g = base
        for _ in range(inner_count(k, cfg.horizon_cap)):
            g = base + contraction @ g
    elif state.step_prev is None:
        g = base
    else:
        g = base + contraction @ state.step_prev
    if not np.all(np.isfinite(g)):
        raise NonFiniteValue("Algorithm III step is not finite")
    return g, Alg3State(x.copy(), grad, g), guarded


def alg4_step(oracle: ObjectiveOracle, x, k: int, cfg: StepperConfig) -> np.ndarray:
    """Coordinatewise ``g_i <- d_i grad_i + (1 - d_i Lambda_i) g_i``."""
    n = oracle.dimension
    grad = oracle.grad(x)
    lam = hessian_diagonal(oracle, x)
    d = expand_diagonal(cfg.D, n)
    base = d * grad
    contraction = 1.0 - d * lam
    g = base
    for _ in range(inner_count(k, cfg.horizon_cap)):
        g = base + contraction * g
    return g


# --- parameters ------------------------------------------------------------

def curvature_scale(oracle: ObjectiveOracle, x0) -> float:
    """Guarded estimate of ``rho(H(x0))`` (max |Lambda_i| when only a diagonal is known)."""
    if oracle.hessian is None and oracle.hessian_diag is not None:
        lam = float(np.max(np.abs(hessian_diagonal(oracle, x0))))
    else:
        hess = oracle.hess(x0)
        try:
            lam = spectral_radius(hess)
        except NoConvergence:
            # row-sum norm bounds every eigenvalue magnitude
            lam = float(np.max(np.sum(np.abs(hess), axis=1)))
    return max(lam, LAMBDA_FLOOR)


def default_parameters(oracle: ObjectiveOracle, x0, algorithm) -> StepperConfig:
    """Parameter rule used when a run does not override a setting.

    With ``lam = max(rho(H(x0)), 1e-8)``: ``M = min(1/lam, 1e4) I``,
    ``gd_step = min(1/lam, 1e4)``, ``R = lam I`` and
    ``d_i = min(0.5 / max(Lambda_i(x0), 1e-8), 1/lam, 1e4)``.  The last clip
    keeps ``D`` from exploding on coordinates with zero curvature at ``x0``.
    """
    algorithm = Algorithm(algorithm)
    x0 = as_vector(x0, oracle.dimension)
    cfg = StepperConfig(algorithm)
    if algorithm is Algorithm.NEWTON:
        return cfg
    lam = curvature_scale(oracle, x0)
    inv = min(1.0 / lam, M_MAX)
    if algorithm is Algorithm.GRADIENT_DESCENT:
        cfg.gd_step = inv
    elif algorithm in (Algorithm.ALG1, Algorithm.FINITE_HORIZON):
        cfg.R = lam
        if algorithm is Algorithm.FINITE_HORIZON:
            cfg.n_horizon = 20
    elif algorithm in (Algorithm.ALG2_CLOSED, Algorithm.ALG2_RECURSIVE):
        cfg.M = inv
    else:
        diag = hessian_diagonal(oracle, x0)
        cfg.D = np.minimum(THETA / np.maximum(diag, CURVATURE_FLOOR), inv)
    return cfg


def contraction_matrix(oracle: ObjectiveOracle, x, cfg: StepperConfig) -> np.ndarray:
    """Matrix whose spectral radius governs the local rate of ``cfg.algorithm``."""
    n = oracle.dimension
    alg = cfg.algorithm
    if alg is Algorithm.NEWTON:
        return np.zeros((n, n))
    if alg is Algorithm.ALG4:
        lam = hessian_diagonal(oracle, x)
        return np.diag(1.0 - expand_diagonal(cfg.D, n) * lam)
    hess = oracle.hess(x)
    if alg is Algorithm.GRADIENT_DESCENT:
        return np.eye(n) - cfg.gd_step * hess
    if alg in (Algorithm.ALG1, Algorithm.FINITE_HORIZON):
        r = expand_weight(cfg.R, n)
        return lu_solve(r + hess, r)
    if alg is Algorithm.ALG3:
        # the backward difference stands in for H near the solution
        return np.eye(n) - expand_diagonal(cfg.D, n)[:, None] * hess
    return np.eye(n) - expand_weight(cfg.M, n) @ hess


def check_parameters(oracle: ObjectiveOracle, x0, cfg: StepperConfig) -> Optional[float]:
    """Warn when the contraction at ``x0`` has spectral radius >= 1.

    The convergence conditions are stated at the (unknown) minimizer, so this
    is advisory only.  Returns the radius, or ``None`` if it could not be
    computed.
    """
    if cfg.algorithm is Algorithm.NEWTON:
        return None
    try:
        rho = spectral_radius(contraction_matrix(oracle, x0, cfg))
    except (LinalgError, NonFiniteValue):
        return None
    if rho >= 1.0:
        warnings.warn(
            f"{cfg.algorithm.value}: contraction radius {rho:.6g} >= 1 at x0",
            ParameterWarning,
            stacklevel=3,
        )
    return rho


# --- run loop --------------------------------------------------------------

class StopKind(str, enum.Enum):
    GRADIENT_TOLERANCE = "gradient-tolerance"
    STEP_TOLERANCE = "step-tolerance"
    MAX_ITERATIONS = "max-iterations"
    HORIZON_REACHED = "horizon-reached"
    NUMERICAL_FAILURE = "numerical-failure"


@dataclass(frozen=True)
class StopReason:
    kind: StopKind
    detail: Optional[BaseException] = None

    @property
    def converged(self) -> bool:
        return self.kind in (StopKind.GRADIENT_TOLERANCE, StopKind.STEP_TOLERANCE,
                             StopKind.HORIZON_REACHED)

    def __str__(self) -> str:
        if self.detail is None:
            return self.kind.value
        return f"{self.kind.value}({type(self.detail).__name__}: {self.detail})"


@dataclass
class TraceRecord:
    k: int
    x: np.ndarray
    f: float
    grad_norm: float
    step: Optional[np.ndarray] = None
    err_norm: Optional[float] = None
    lyapunov: Optional[float] = None
    guarded_columns: Optional[list] = None


@dataclass
class Trace:
    records: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, i) -> TraceRecord:
        return self.records[i]

    @property
    def iterations(self) -> int:
        """Number of steps actually taken."""
        return sum(1 for r in self.records if r.step is not None)

    @property
    def xs(self) -> np.ndarray:
        return np.array([r.x for r in self.records])

    @property
    def fs(self) -> np.ndarray:
        return np.array([r.f for r in self.records])

    @property
    def grad_norms(self) -> np.ndarray:
        return np.array([r.grad_norm for r in self.records])

    @property
    def errors(self) -> Optional[np.ndarray]:
        if not self.records or self.records[0].err_norm is None:
            return None
        return np.array([r.err_norm for r in self.records])

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]


def compute_step(oracle, x, k, cfg, state):
    """Dispatch one step; returns ``(step, state, guarded_columns)``."""
    alg = cfg.algorithm
    if alg is Algorithm.GRADIENT_DESCENT:
        return gd_step(oracle, x, cfg), state, None
    if alg is Algorithm.NEWTON:
        return newton_step(oracle, x), state, None
    if alg is Algorithm.FINITE_HORIZON:
        return finite_horizon_step(oracle, x, k, cfg), state, None
    if alg is Algorithm.ALG1:
        return alg1_step(oracle, x, k, cfg), state, None
    if alg is Algorithm.ALG2_CLOSED:
        return alg2_closed_step(oracle, x, k, cfg), state, None
    if alg is Algorithm.ALG2_RECURSIVE:
        return alg2_recursive_step(oracle, x, k, cfg), state, None
    if alg is Algorithm.ALG3:
        return alg3_step(oracle, state or Alg3State(), x, k, cfg)
    return alg4_step(oracle, x, k, cfg), state, None


def run(oracle: ObjectiveOracle, x0, cfg: StepperConfig, *, strict: bool = False,
        check: bool = True):
    """Iterate from ``x0`` and return ``(Trace, StopReason)``.

    Stops when ``|grad| <= grad_tol``, ``|step| <= step_tol``, after
    ``max_iter`` steps, or (finite-horizon only) once ``k > n_horizon``.
    Stepper errors end the run with ``NUMERICAL_FAILURE``; with
    ``strict=True`` they are raised as :class:`NumericalFailure` carrying the
    partial trace.
    """
    n = oracle.dimension
    x = as_vector(x0, n)
    cfg.validate(n)
    if check:
        check_parameters(oracle, x, cfg)
    x_star = oracle.known_minimizer
    f_star = oracle.f(x_star) if x_star is not None else None
    trace = Trace()
    state = None
    stop = None
    pending = None
    k = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while True:
            try:
                fx = oracle.f(x)
                gnorm = float(np.linalg.norm(oracle.grad(x)))
            except (LinalgError, ArithmeticError, ValueError) as exc:
                stop = StopReason(StopKind.NUMERICAL_FAILURE, exc)
                break
            rec = TraceRecord(k, x.copy(), fx, gnorm)
            if x_star is not None:
                rec.err_norm = float(np.linalg.norm(x - x_star))
                rec.lyapunov = fx - f_star
            trace.records.append(rec)
            if gnorm <= cfg.grad_tol:
                stop = StopReason(StopKind.GRADIENT_TOLERANCE)
                break
            if pending is not None:
                stop = StopReason(pending)
                break
            if k >= cfg.max_iter:
                stop = StopReason(StopKind.MAX_ITERATIONS)
                break
            if cfg.algorithm is Algorithm.FINITE_HORIZON and k > int(cfg.n_horizon):
                stop = StopReason(StopKind.HORIZON_REACHED)
                break
            try:
                step, state, guarded = compute_step(oracle, x, k, cfg, state)
                if not np.all(np.isfinite(step)):
                    raise NonFiniteValue(f"non-finite step at k={k}")
            except (LinalgError, ArithmeticError, HorizonExceeded, ValueError) as exc:
                stop = StopReason(StopKind.NUMERICAL_FAILURE, exc)
                break
            rec.step = step
            rec.guarded_columns = guarded
            x = x - step
            if float(np.linalg.norm(step)) <= cfg.step_tol:
                pending = StopKind.STEP_TOLERANCE
            k += 1
    if strict and stop.kind is StopKind.NUMERICAL_FAILURE:
        raise NumericalFailure(stop.detail, trace)
    return trace, stop


def with_overrides(cfg: StepperConfig, **overrides) -> StepperConfig:
    return replace(cfg, **overrides)
