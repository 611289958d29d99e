"""Exact and brute-force solvers for the finite-horizon control problem

    min_u  sum_{k=0}^{N} [f(x_k) + 0.5 u_k' R u_k] + f(x_{N+1}),   x_{k+1} = x_k + u_k

with quadratic ``f(x) = 0.5 x'Qx + b'x``.  The optimal controls satisfy
``u_k = -R^{-1} p_k`` with costates ``p_k = sum_{i=k+1}^{N+1} grad f(x_i)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, as_vector, is_symmetric_pd, lu_solve

BRUTE_FORCE_MAX_UNKNOWNS = 64


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class LqOcpProblem:
    Q: np.ndarray
    b: np.ndarray
    R: np.ndarray
    N: int
    x0: np.ndarray

    def __post_init__(self):
        Q = as_matrix(self.Q, square=True)
        R = as_matrix(self.R, square=True)
        n = Q.shape[0]
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "b", as_vector(self.b, n))
        object.__setattr__(self, "x0", as_vector(self.x0, n))
        if R.shape != Q.shape:
            raise ValueError("Q and R must have the same shape")
        if int(self.N) < 0:
            raise ValueError("N must be non-negative")
        if not is_symmetric_pd(Q, tol=1e-10) or not is_symmetric_pd(R, tol=1e-10):
            raise ValueError("Q and R must be symmetric positive definite")

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    def f(self, x) -> float:
        return float(0.5 * x @ self.Q @ x + self.b @ x)

    def grad(self, x) -> np.ndarray:
        return self.Q @ x + self.b


@dataclass(frozen=True)
class LqOcpSolution:
    controls: np.ndarray  # (N+1, n)
    states: np.ndarray    # (N+2, n)
    costates: np.ndarray  # (N+1, n)
    cost: float


def simulate(prob: LqOcpProblem, controls) -> np.ndarray:
    controls = np.asarray(controls, dtype=float).reshape(prob.N + 1, prob.n)
    return np.vstack([prob.x0, prob.x0 + np.cumsum(controls, axis=0)])


def ocp_cost(prob: LqOcpProblem, controls) -> float:
    controls = np.asarray(controls, dtype=float).reshape(prob.N + 1, prob.n)
    states = simulate(prob, controls)
    state_cost = 0.5 * np.einsum("ki,ij,kj->", states, prob.Q, states) + np.sum(states @ prob.b)
    control_cost = 0.5 * np.einsum("ki,ij,kj->", controls, prob.R, controls)
    return float(state_cost + control_cost)


def solve_lq_exact(prob: LqOcpProblem) -> LqOcpSolution:
    """Solve the equality-constrained KKT system in (u, x_1..x_{N+1}, lambda).

    The multipliers of ``x_{k+1} - x_k - u_k = 0`` are the negated costates.
    """
    n, N = prob.n, int(prob.N)
    nu = (N + 1) * n          # controls u_0..u_N
    nx = (N + 1) * n          # states x_1..x_{N+1}
    nz = nu + nx
    size = nz + nx            # one multiplier block per dynamics constraint
    kkt = np.zeros((size, size))
    rhs = np.zeros(size)

    def u_idx(k):
        return slice(k * n, (k + 1) * n)

    def x_idx(k):  # k = 1..N+1
        return slice(nu + (k - 1) * n, nu + k * n)

    def lam_idx(k):
        return slice(nz + k * n, nz + (k + 1) * n)

    eye = np.eye(n)
    for k in range(N + 1):
        kkt[u_idx(k), u_idx(k)] = prob.R
        kkt[x_idx(k + 1), x_idx(k + 1)] = prob.Q
        rhs[x_idx(k + 1)] = -prob.b
        # constraint k: x_{k+1} - x_k - u_k = 0  (x_0 fixed)
        rows = lam_idx(k)
        kkt[rows, x_idx(k + 1)] = eye
        kkt[rows, u_idx(k)] = -eye
        if k >= 1:
            kkt[rows, x_idx(k)] = -eye
        else:
            rhs[rows] = prob.x0
    # symmetric KKT: stationarity rows carry the transposed constraint blocks
    kkt[:nz, nz:] = kkt[nz:, :nz].T
    sol = lu_solve(kkt, rhs)
    controls = sol[:nu].reshape(N + 1, n)
    states = np.vstack([prob.x0, sol[nu:nz].reshape(N + 1, n)])
    costates = -sol[nz:].reshape(N + 1, n)
    return LqOcpSolution(controls, states, costates, ocp_cost(prob, controls))


def brute_force_lq(prob: LqOcpProblem) -> LqOcpSolution:
    """Assemble the cost's gradient and Hessian in the stacked controls by
    central differences of :func:`ocp_cost`, then solve the normal equations.

    Differences with unit steps are exact for a quadratic up to roundoff.
    """
    n, N = prob.n, int(prob.N)
    size = (N + 1) * n
    if size > BRUTE_FORCE_MAX_UNKNOWNS:
        raise TooLarge(f"{size} unknowns exceeds {BRUTE_FORCE_MAX_UNKNOWNS}")
    h = 1.0
    eye = np.eye(size) * h
    grad = np.array([(ocp_cost(prob, eye[i]) - ocp_cost(prob, -eye[i])) / (2 * h)
                     for i in range(size)])
    hess = np.empty((size, size))
    for i in range(size):
        for j in range(i, size):
            val = (ocp_cost(prob, eye[i] + eye[j]) - ocp_cost(prob, eye[i] - eye[j])
                   - ocp_cost(prob, -eye[i] + eye[j]) + ocp_cost(prob, -eye[i] - eye[j]))
            hess[i, j] = hess[j, i] = val / (4 * h * h)
    controls = lu_solve(hess, -grad).reshape(N + 1, n)
    states = simulate(prob, controls)
    costates = np.array([sum(prob.grad(x) for x in states[k + 1:]) for k in range(N + 1)])
    return LqOcpSolution(controls, states, costates, ocp_cost(prob, controls))


@dataclass(frozen=True)
class ControlLawResidual:
    control: np.ndarray    # per k: |u_k + R^{-1} sum_{i>k} grad f(x_i)|
    costate: np.ndarray    # per k=1..N: |p_{k-1} - p_k - grad f(x_k)|
    terminal: float        # |p_N - grad f(x_{N+1})|
    dynamics: float        # max |x_{k+1} - x_k - u_k|

    @property
    def max(self) -> float:
        parts = [self.terminal, self.dynamics]
        parts += [float(np.max(self.control))] if self.control.size else []
        parts += [float(np.max(self.costate))] if self.costate.size else []
        return max(parts)


def verify_control_law(prob: LqOcpProblem, sol: LqOcpSolution) -> ControlLawResidual:
    N = int(prob.N)
    grads = np.array([prob.grad(x) for x in sol.states])
    tails = np.cumsum(grads[::-1], axis=0)[::-1]   # tails[i] = sum_{j>=i} grad_j
    control = np.array([
        np.max(np.abs(sol.controls[k] + lu_solve(prob.R, tails[k + 1]))) for k in range(N + 1)
    ])
    p = sol.costates
    costate = np.array([np.max(np.abs(p[k - 1] - p[k] - grads[k])) for k in range(1, N + 1)])
    terminal = float(np.max(np.abs(p[N] - grads[N + 1])))
    dynamics = float(np.max(np.abs(np.diff(sol.states, axis=0) - sol.controls)))
    return ControlLawResidual(control, costate, terminal, dynamics)


def random_lq_problem(rng: np.random.Generator, max_n: int = 3, max_N: int = 5) -> LqOcpProblem:
    n = int(rng.integers(1, max_n + 1))
    N = int(rng.integers(0, max_N + 1))
    a = rng.standard_normal((n, n))
    c = rng.standard_normal((n, n))
    return LqOcpProblem(
        Q=a @ a.T + 0.1 * np.eye(n),
        b=rng.standard_normal(n),
        R=c @ c.T + 0.1 * np.eye(n),
        N=N,
        x0=rng.standard_normal(n),
    )
