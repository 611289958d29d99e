"""Small dense linear-algebra kernel.

Everything here works on plain ``numpy`` float64 arrays.  Inverses are never
formed: every ``(A)^{-1} b`` in the iteration formulas goes through
:func:`lu_solve`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_RTOL = 1e-14


class LinalgError(ArithmeticError):
    pass


class SingularMatrix(LinalgError):
    """Raised when a pivot falls below ``PIVOT_RTOL * max|A|``."""


class NoConvergence(LinalgError):
    pass


class ShapeError(ValueError):
    pass


def as_vector(v, n: int | None = None) -> np.ndarray:
    out = np.array(v, dtype=float).reshape(-1)
    if out.size == 0:
        raise ShapeError("vector must have at least one element")
    if n is not None and out.size != n:
        raise ShapeError(f"expected vector of length {n}, got {out.size}")
    if not np.all(np.isfinite(out)):
        raise ValueError("vector contains non-finite entries")
    return out


def as_matrix(a, square: bool = False) -> np.ndarray:
    out = np.array(a, dtype=float)
    if out.ndim == 0:
        out = out.reshape(1, 1)
    if out.ndim != 2 or 0 in out.shape:
        raise ShapeError(f"expected a non-empty 2-D matrix, got shape {out.shape}")
    if square and out.shape[0] != out.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError("matrix contains non-finite entries")
    return out


def max_norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


@dataclass(frozen=True)
class LUFactorization:
    """Packed ``PA = LU`` factors (unit lower ``L`` below the diagonal)."""

    lu: np.ndarray
    perm: np.ndarray

    @property
    def n(self) -> int:
        return self.lu.shape[0]

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        vector_rhs = b.ndim == 1
        if b.ndim not in (1, 2) or b.shape[0] != self.n:
            raise ShapeError(f"right-hand side has shape {b.shape}, expected {self.n} rows")
        rhs = b.reshape(self.n, -1) if vector_rhs else b
        y = rhs[self.perm].copy()
        lu = self.lu
        for i in range(1, self.n):
            y[i] -= lu[i, :i] @ y[:i]
        for i in range(self.n - 1, -1, -1):
            y[i] -= lu[i, i + 1:] @ y[i + 1:]
            y[i] /= lu[i, i]
        return y.reshape(-1) if vector_rhs else y


def lu_factor(a) -> LUFactorization:
    """Gaussian elimination with partial (row) pivoting."""
    a = as_matrix(a, square=True)
    n = a.shape[0]
    lu = a.copy()
    perm = np.arange(n)
    threshold = PIVOT_RTOL * max_norm(a)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) <= threshold:
            raise SingularMatrix(
                f"pivot {abs(lu[p, k]):.3e} at column {k} is below {threshold:.3e}"
            )
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return LUFactorization(lu, perm)


def lu_solve(a, b) -> np.ndarray:
    """Solve ``A X = B``; ``B`` may be a vector or an ``n x m`` matrix."""
    return lu_factor(a).solve(b)


def matrix_power(a, p: int) -> np.ndarray:
    """``A**p`` by binary exponentiation, with ``A**0 = I``."""
    a = as_matrix(a, square=True)
    if p < 0:
        raise ValueError("exponent must be non-negative")
    result = np.eye(a.shape[0])
    base = a
    while p:
        if p & 1:
            result = result @ base
        p >>= 1
        if p:
            base = base @ base
    return result


def geometric_sum_apply(a, c, v, m: int) -> np.ndarray:
    """Return ``sum_{i=0}^{m} A^i C v`` without forming any power of ``A``."""
    a = as_matrix(a, square=True)
    c = as_matrix(c, square=True)
    v = np.asarray(v, dtype=float).reshape(-1)
    if c.shape != a.shape or v.size != a.shape[0]:
        raise ShapeError("A, C and v must share the dimension n")
    if m < 0:
        raise ValueError("m must be non-negative")
    t = c @ v
    s = t.copy()
    for _ in range(m):
        t = a @ t
        s = s + t
    return s


def spectral_radius_closed_form(a) -> float:
    """Exact spectral radius for 1x1 and 2x2 matrices (complex pairs included)."""
    a = as_matrix(a, square=True)
    n = a.shape[0]
    if n == 1:
        return abs(float(a[0, 0]))
    if n != 2:
        raise ShapeError("closed form only available for n <= 2")
    tr = a[0, 0] + a[1, 1]
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    disc = 0.25 * tr * tr - det
    if disc >= 0:
        root = np.sqrt(disc)
        half = 0.5 * tr
        # avoid cancellation in the smaller root
        big = half + np.copysign(root, half) if half != 0 else root
        small = det / big if big != 0 else 0.0
        return float(max(abs(big), abs(small)))
    # complex pair: |lambda|^2 = det
    return float(np.sqrt(det))


def _power_iteration(a, v, max_iter, tol):
    # Estimates |A v_k| converge geometrically; the Aitken error estimate
    # d_k q / (1 - q), q = d_k / d_{k-1}, decides when to stop and corrects
    # the returned value.  Near-tied eigenvalues (q ~ 1) fall back to plain
    # stabilization |d_k| <= tol * est at max_iter.
    v = v / np.linalg.norm(v)
    prev = None
    prev_delta = None
    delta = None
    est = 0.0
    for _ in range(max_iter):
        w = a @ v
        est = float(np.linalg.norm(w))
        if est == 0.0:
            return 0.0
        scale = tol * max(1.0, est)
        if prev is not None:
            delta = est - prev
            if delta == 0.0:
                return est
            if prev_delta is not None and prev_delta != 0.0:
                q = delta / prev_delta
                if 0.0 <= q < 1.0:
                    correction = delta * q / (1.0 - q)
                    if abs(correction) <= scale:
                        return est + correction
                elif abs(delta) <= scale and abs(prev_delta) <= scale:
                    return est
            prev_delta = delta
        prev = est
        v = w / est
    if delta is not None and abs(delta) <= tol * max(1.0, est):
        return est
    return None


def spectral_radius(a, *, restarts: int = 5, max_iter: int = 10_000,
                    tol: float = 1e-12, seed: int = 0,
                    method: str = "auto") -> float:
    """Estimate ``max |eigenvalue|`` of a square matrix.

    ``method="power"`` runs normalized power iteration from ``restarts`` seeded
    random starts and returns the largest estimate among starts that
    stabilized.  This is reliable for the real, diagonalizable spectra that
    show up here (``(R+H)^{-1} R`` is similar to a symmetric PSD matrix) but
    not for dominant complex pairs, which raise :class:`NoConvergence`.

    ``method="auto"`` (default) uses the exact closed form for ``n <= 2`` and
    power iteration otherwise.
    """
    a = as_matrix(a, square=True)
    n = a.shape[0]
    if method not in ("auto", "power", "closed"):
        raise ValueError(f"unknown method {method!r}")
    if method == "closed" or (method == "auto" and n <= 2):
        return spectral_radius_closed_form(a)
    if not np.any(a):
        return 0.0
    rng = np.random.default_rng(seed)
    estimates = []
    for _ in range(restarts):
        est = _power_iteration(a, rng.standard_normal(n), max_iter, tol)
        if est is not None:
            estimates.append(est)
    if not estimates:
        raise NoConvergence("power iteration did not stabilize from any restart")
    return max(estimates)


def is_symmetric_pd(a, tol: float = 1e-12) -> bool:
    """Symmetry within ``tol`` (relative) plus positive pivots of the symmetric part."""
    a = as_matrix(a, square=True)
    if max_norm(a - a.T) > tol * (1.0 + max_norm(a)):
        return False
    s = 0.5 * (a + a.T)
    n = s.shape[0]
    # elimination without pivoting: pivot_k = det(S_k) / det(S_{k-1})
    for k in range(n):
        pivot = s[k, k]
        if not pivot > 0.0:
            return False
        s[k + 1:, k + 1:] -= np.outer(s[k + 1:, k], s[k, k + 1:]) / pivot
    return True
