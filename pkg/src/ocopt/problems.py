"""Test objectives with analytic derivatives and known minimizers."""
from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .differentiation import ObjectiveOracle
from .linalg import SingularMatrix, as_matrix, as_vector, is_symmetric_pd, lu_solve


class ConvexityClass(str, enum.Enum):
    STRICTLY_CONVEX_QUADRATIC = "strictly-convex-quadratic"
    STRICTLY_CONVEX = "strictly-convex"
    SINGULAR_HESSIAN_POINT = "singular-hessian-point"
    NONCONVEX = "nonconvex"


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    oracle: ObjectiveOracle
    recommended_x0: np.ndarray
    convexity_class: ConvexityClass

    @property
    def known_minimizer(self) -> Optional[np.ndarray]:
        return self.oracle.known_minimizer

    @property
    def dimension(self) -> int:
        return self.oracle.dimension


def make_quadratic(Q, b=None, name: str = "quadratic", x0=None) -> ProblemSpec:
    """``f = 0.5 x'Qx + b'x`` with minimizer ``-Q^{-1} b``."""
    Q = as_matrix(Q, square=True)
    n = Q.shape[0]
    b = np.zeros(n) if b is None else as_vector(b, n)
    if not is_symmetric_pd(Q):
        raise SingularMatrix("Q must be symmetric positive definite")
    x_star = lu_solve(Q, -b)
    diag = np.diag(Q).copy()
    oracle = ObjectiveOracle(
        value=lambda x: 0.5 * x @ Q @ x + b @ x,
        gradient=lambda x: Q @ x + b,
        hessian=lambda x: Q,
        hessian_diag=lambda x: diag,
        dimension=n,
        known_minimizer=x_star,
    )
    x0 = x_star + 1.0 if x0 is None else as_vector(x0, n)
    return ProblemSpec(name, oracle, x0, ConvexityClass.STRICTLY_CONVEX_QUADRATIC)


def random_spd(n: int, rng: np.random.Generator, cond: float = 100.0) -> np.ndarray:
    """Random SPD matrix with eigenvalues log-spaced in ``[1, cond]``."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eig = np.logspace(0.0, np.log10(cond), n)
    rng.shuffle(eig)
    a = (q * eig) @ q.T
    return 0.5 * (a + a.T)


def make_random_quadratic(n: int = 3, seed: int = 0) -> ProblemSpec:
    rng = np.random.default_rng(seed)
    Q = random_spd(n, rng)
    b = rng.standard_normal(n)
    spec = make_quadratic(Q, b, name=f"quadratic-random-{n}")
    x0 = spec.known_minimizer + rng.standard_normal(n)
    return ProblemSpec(spec.name, spec.oracle, x0, spec.convexity_class)


def _rosen_value(x):
    return 100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2


def _rosen_grad(x):
    return np.array([
        -400.0 * x[0] * (x[1] - x[0] ** 2) - 2.0 * (1.0 - x[0]),
        200.0 * (x[1] - x[0] ** 2),
    ])


def _rosen_hess(x):
    return np.array([
        [1200.0 * x[0] ** 2 - 400.0 * x[1] + 2.0, -400.0 * x[0]],
        [-400.0 * x[0], 200.0],
    ])


def make_rosenbrock() -> ProblemSpec:
    oracle = ObjectiveOracle(
        value=_rosen_value,
        gradient=_rosen_grad,
        hessian=_rosen_hess,
        hessian_diag=lambda x: np.diag(_rosen_hess(x)).copy(),
        dimension=2,
        known_minimizer=np.array([1.0, 1.0]),
    )
    return ProblemSpec("rosenbrock", oracle, np.array([-1.2, 1.0]), ConvexityClass.NONCONVEX)


def make_singular_quartic() -> ProblemSpec:
    """``x1^4/4 + x1 + x2^2``: Hessian ``diag(3 x1^2, 2)`` is singular on ``x1 = 0``."""
    oracle = ObjectiveOracle(
        value=lambda x: 0.25 * x[0] ** 4 + x[0] + x[1] ** 2,
        gradient=lambda x: np.array([x[0] ** 3 + 1.0, 2.0 * x[1]]),
        hessian=lambda x: np.diag([3.0 * x[0] ** 2, 2.0]),
        hessian_diag=lambda x: np.array([3.0 * x[0] ** 2, 2.0]),
        dimension=2,
        known_minimizer=np.array([-1.0, 0.0]),
    )
    return ProblemSpec("singular-quartic", oracle, np.array([0.0, 1.0]),
                       ConvexityClass.SINGULAR_HESSIAN_POINT)


# 8 samples, 2 features; labels in {-1, +1}, deliberately not separable
LOGISTIC_FEATURES = np.array([
    [1.0, 2.0],
    [2.0, -1.0],
    [-1.0, 1.5],
    [0.5, -2.0],
    [-2.0, -0.5],
    [1.5, 0.5],
    [-0.5, -1.0],
    [0.0, 1.0],
])
LOGISTIC_LABELS = np.array([1.0, 1.0, -1.0, 1.0, -1.0, -1.0, 1.0, -1.0])
LOGISTIC_RIDGE = 0.1


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


class _Logistic:
    def __init__(self, features, labels, ridge):
        self.a = features
        self.y = labels
        self.ridge = ridge

    def value(self, x):
        z = self.y * (self.a @ x)
        return float(np.sum(np.logaddexp(0.0, -z)) + 0.5 * self.ridge * x @ x)

    def gradient(self, x):
        z = self.y * (self.a @ x)
        return -self.a.T @ (self.y * _sigmoid(-z)) + self.ridge * x

    def _weights(self, x):
        s = _sigmoid(self.a @ x)
        return s * (1.0 - s)

    def hessian(self, x):
        w = self._weights(x)
        h = (self.a.T * w) @ self.a
        return 0.5 * (h + h.T) + self.ridge * np.eye(self.a.shape[1])

    def hessian_diag(self, x):
        return self._weights(x) @ self.a ** 2 + self.ridge


@functools.lru_cache(maxsize=None)
def _logistic_minimizer() -> tuple:
    # Newton from the origin; certified to |grad| <= 1e-12 in the tests
    obj = _Logistic(LOGISTIC_FEATURES, LOGISTIC_LABELS, LOGISTIC_RIDGE)
    x = np.zeros(2)
    for _ in range(50):
        g = obj.gradient(x)
        if np.linalg.norm(g) <= 1e-13:
            break
        x = x - lu_solve(obj.hessian(x), g)
    return tuple(x)


def make_logistic() -> ProblemSpec:
    obj = _Logistic(LOGISTIC_FEATURES, LOGISTIC_LABELS, LOGISTIC_RIDGE)
    oracle = ObjectiveOracle(
        value=obj.value,
        gradient=obj.gradient,
        hessian=obj.hessian,
        hessian_diag=obj.hessian_diag,
        dimension=2,
        known_minimizer=np.array(_logistic_minimizer()),
    )
    return ProblemSpec("logistic", oracle, np.zeros(2), ConvexityClass.STRICTLY_CONVEX)


PROBLEMS = {
    "quadratic-identity-2": lambda seed: make_quadratic(
        np.eye(2), name="quadratic-identity-2", x0=[1.0, -1.0]),
    "quadratic-diag-2-3": lambda seed: make_quadratic(
        np.diag([2.0, 3.0]), [-2.0, -3.0], name="quadratic-diag-2-3", x0=[0.0, 1.0]),
    "quadratic-illcond": lambda seed: make_quadratic(
        np.diag([1.0, 1e4]), name="quadratic-illcond", x0=[1.0, 1.0]),
    "quadratic-random-3": lambda seed: make_random_quadratic(3, seed),
    "quadratic-random-5": lambda seed: make_random_quadratic(5, seed),
    "rosenbrock": lambda seed: make_rosenbrock(),
    "singular-quartic": lambda seed: make_singular_quartic(),
    "logistic": lambda seed: make_logistic(),
}


def get_problem(name: str, seed: int = 0) -> ProblemSpec:
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; known: {', '.join(PROBLEMS)}") from None
    return factory(seed)
