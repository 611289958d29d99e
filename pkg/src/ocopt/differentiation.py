"""Derivative information for the iterations: oracles, finite differences,
the backward-difference matrix and the Hessian diagonal."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .linalg import as_vector


class NonFiniteValue(ArithmeticError):
    pass


class AllColumnsDegenerate(ArithmeticError):
    """Every coordinate moved less than the guard between two iterates."""


@dataclass(frozen=True)
class ObjectiveOracle:
    """Callbacks for ``f``, its gradient and (optionally) second-order data.

    Oracles must be reentrant; none of the helpers here cache anything.
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    dimension: int
    hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hessian_diag: Optional[Callable[[np.ndarray], np.ndarray]] = None
    known_minimizer: Optional[np.ndarray] = None

    def f(self, x) -> float:
        val = float(self.value(x))
        if not np.isfinite(val):
            raise NonFiniteValue(f"f(x) = {val}")
        return val

    def grad(self, x) -> np.ndarray:
        g = np.asarray(self.gradient(x), dtype=float).reshape(-1)
        if g.size != self.dimension:
            raise ValueError(f"gradient has length {g.size}, expected {self.dimension}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteValue("gradient has non-finite entries")
        return g

    def hess(self, x) -> np.ndarray:
        """Analytic Hessian when available, otherwise :func:`fd_hessian`."""
        if self.hessian is None:
            return fd_hessian(self, x)
        h = np.asarray(self.hessian(x), dtype=float)
        if h.shape != (self.dimension, self.dimension):
            raise ValueError(f"hessian has shape {h.shape}")
        if not np.all(np.isfinite(h)):
            raise NonFiniteValue("hessian has non-finite entries")
        return h


def default_steps(x, h=None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if h is None:
        return 1e-5 * (1.0 + np.abs(x))
    steps = np.broadcast_to(np.asarray(h, dtype=float), x.shape).copy()
    if np.any(steps <= 0):
        raise ValueError("finite-difference steps must be positive")
    return steps


def fd_gradient(oracle: ObjectiveOracle, x, h=None) -> np.ndarray:
    """Central differences ``(f(x+h e_i) - f(x-h e_i)) / 2h``."""
    x = as_vector(x, oracle.dimension)
    steps = default_steps(x, h)
    g = np.empty_like(x)
    for i, hi in enumerate(steps):
        e = np.zeros_like(x)
        e[i] = hi
        g[i] = (oracle.f(x + e) - oracle.f(x - e)) / (2.0 * hi)
    return g


def fd_hessian(oracle: ObjectiveOracle, x, h=None) -> np.ndarray:
    """Central differences of the gradient, symmetrized as ``(H + H^T)/2``."""
    x = as_vector(x, oracle.dimension)
    steps = default_steps(x, h)
    n = x.size
    hess = np.empty((n, n))
    for j, hj in enumerate(steps):
        e = np.zeros(n)
        e[j] = hj
        hess[:, j] = (oracle.grad(x + e) - oracle.grad(x - e)) / (2.0 * hj)
    return 0.5 * (hess + hess.T)


def hessian_diagonal(oracle: ObjectiveOracle, x, h=None) -> np.ndarray:
    x = as_vector(x, oracle.dimension)
    if oracle.hessian_diag is not None:
        d = np.asarray(oracle.hessian_diag(x), dtype=float).reshape(-1)
        if not np.all(np.isfinite(d)):
            raise NonFiniteValue("hessian diagonal has non-finite entries")
        return d
    steps = default_steps(x, h)
    f0 = oracle.f(x)
    d = np.empty_like(x)
    for i, hi in enumerate(steps):
        e = np.zeros_like(x)
        e[i] = hi
        d[i] = (oracle.f(x + e) - 2.0 * f0 + oracle.f(x - e)) / (hi * hi)
    return d


@dataclass(frozen=True)
class DifferencePair:
    x_prev: np.ndarray
    grad_prev: np.ndarray
    x_curr: np.ndarray
    grad_curr: np.ndarray

    def __post_init__(self):
        n = np.size(self.x_curr)
        for name in ("x_prev", "grad_prev", "grad_curr"):
            if np.size(getattr(self, name)) != n:
                raise ValueError(f"{name} does not have dimension {n}")


def backward_difference_jacobian(pair: DifferencePair, guard: float = 1e-12):
    """Entrywise secant matrix ``(dg_i) / (dx_j)`` between two iterates.

    Columns whose coordinate moved by less than ``guard`` are replaced by the
    matching identity column.  Returns ``(matrix, guarded_columns)``.  Note the
    result is generally nonsymmetric (rank one before guarding when n > 1).
    """
    if guard <= 0:
        raise ValueError("guard must be positive")
    dx = np.asarray(pair.x_curr, float) - np.asarray(pair.x_prev, float)
    dg = np.asarray(pair.grad_curr, float) - np.asarray(pair.grad_prev, float)
    n = dx.size
    guarded = [j for j in range(n) if abs(dx[j]) < guard]
    if len(guarded) == n:
        raise AllColumnsDegenerate("no coordinate moved by at least the guard")
    d1 = np.empty((n, n))
    for j in range(n):
        if j in guarded:
            d1[:, j] = 0.0
            d1[j, j] = 1.0
        else:
            d1[:, j] = dg / dx[j]
    return d1, guarded
