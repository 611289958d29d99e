import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ocopt.differentiation import (
    AllColumnsDegenerate,
    DifferencePair,
    NonFiniteValue,
    ObjectiveOracle,
    backward_difference_jacobian,
    fd_gradient,
    fd_hessian,
    hessian_diagonal,
)
from ocopt.problems import make_rosenbrock


def quad_oracle(q, with_diag=True):
    q = np.asarray(q, dtype=float)
    return ObjectiveOracle(
        value=lambda x: 0.5 * x @ q @ x,
        gradient=lambda x: q @ x,
        hessian=lambda x: q,
        hessian_diag=(lambda x: np.diag(q).copy()) if with_diag else None,
        dimension=q.shape[0],
    )


def value_only(fun, n):
    def no_grad(x):
        raise AssertionError("gradient should not be called")
    return ObjectiveOracle(value=fun, gradient=no_grad, dimension=n)


def linear_oracle(c):
    c = np.asarray(c, dtype=float)
    return ObjectiveOracle(value=lambda x: c @ x + 3.0, gradient=lambda x: c.copy(),
                           dimension=c.size)


def test_fd_gradient_half_square():
    g = fd_gradient(value_only(lambda x: 0.5 * x[0] ** 2, 1), [2.0], 1e-5)
    assert g == pytest.approx([2.0], abs=1e-8)


def test_fd_gradient_constant():
    g = fd_gradient(value_only(lambda x: 7.0, 3), [1.0, -2.0, 0.5])
    np.testing.assert_array_equal(g, np.zeros(3))


def test_fd_gradient_product():
    g = fd_gradient(value_only(lambda x: x[0] * x[1], 2), [1.0, 3.0], 1e-5)
    np.testing.assert_allclose(g, [3.0, 1.0], atol=1e-8)


def test_fd_gradient_non_finite():
    with pytest.raises(NonFiniteValue):
        fd_gradient(value_only(lambda x: np.log(x[0]) if x[0] > 0 else np.nan, 1), [0.0])


def test_fd_gradient_rejects_bad_step():
    with pytest.raises(ValueError):
        fd_gradient(value_only(lambda x: x[0], 1), [0.0], 0.0)


def test_fd_hessian_diagonal_quadratic():
    h = fd_hessian(quad_oracle(np.diag([2.0, 3.0])), [0.3, -0.7])
    np.testing.assert_allclose(h, np.diag([2.0, 3.0]), atol=1e-6)


def test_fd_hessian_linear_is_zero():
    h = fd_hessian(linear_oracle([1.0, -2.0, 4.0]), [1.0, 2.0, 3.0])
    np.testing.assert_allclose(h, np.zeros((3, 3)), atol=1e-10)


def test_fd_hessian_rosenbrock_at_minimizer():
    oracle = make_rosenbrock().oracle
    h = fd_hessian(oracle, [1.0, 1.0])
    np.testing.assert_allclose(h, [[802.0, -400.0], [-400.0, 200.0]], atol=1e-4)


@given(arrays(np.float64, 3, elements=st.floats(-3, 3)))
def test_fd_hessian_exactly_symmetric(x):
    h = fd_hessian(make_rosenbrock().oracle, x[:2])
    assert np.array_equal(h, h.T)


def test_hessian_diagonal_prefers_callback():
    oracle = quad_oracle(np.diag([2.0, 3.0]))
    np.testing.assert_array_equal(hessian_diagonal(oracle, [5.0, 5.0]), [2.0, 3.0])


def test_hessian_diagonal_fd_quadratic():
    oracle = quad_oracle(np.diag([2.0, 3.0]), with_diag=False)
    np.testing.assert_allclose(hessian_diagonal(oracle, [0.5, -1.0]), [2.0, 3.0], atol=1e-4)


def test_hessian_diagonal_fd_linear():
    d = hessian_diagonal(linear_oracle([1.0, 2.0]), [0.1, 0.2])
    np.testing.assert_allclose(d, [0.0, 0.0], atol=1e-4)


def test_hessian_diagonal_fd_rosenbrock():
    rb = make_rosenbrock().oracle
    oracle = ObjectiveOracle(value=rb.value, gradient=rb.gradient, dimension=2)
    np.testing.assert_allclose(hessian_diagonal(oracle, [1.0, 1.0]), [802.0, 200.0], atol=1e-3)


def test_backward_difference_scalar_quadratic():
    # f = x^2/2: the gradient equals the iterate, so the quotient is exactly 1
    pair = DifferencePair(np.array([0.3]), np.array([0.3]), np.array([1.7]), np.array([1.7]))
    d1, guarded = backward_difference_jacobian(pair)
    np.testing.assert_array_equal(d1, [[1.0]])
    assert guarded == []


def test_backward_difference_entrywise():
    q = np.diag([2.0, 3.0])
    x_prev, x_curr = np.zeros(2), np.ones(2)
    pair = DifferencePair(x_prev, q @ x_prev, x_curr, q @ x_curr)
    d1, _ = backward_difference_jacobian(pair)
    np.testing.assert_array_equal(d1, [[2.0, 2.0], [3.0, 3.0]])


def test_backward_difference_stalled():
    x = np.array([1.0, 2.0])
    with pytest.raises(AllColumnsDegenerate):
        backward_difference_jacobian(DifferencePair(x, x, x.copy(), x.copy()))


def test_backward_difference_guarded_column():
    pair = DifferencePair(np.array([0.0, 1.0]), np.array([0.0, 0.0]),
                          np.array([0.5, 1.0]), np.array([1.0, 2.0]))
    d1, guarded = backward_difference_jacobian(pair, guard=1e-12)
    assert guarded == [1]
    np.testing.assert_array_equal(d1, [[2.0, 0.0], [4.0, 1.0]])


@given(
    arrays(np.float64, 4, elements=st.floats(-1e3, 1e3)),
    arrays(np.float64, 4, elements=st.floats(-1e3, 1e3)),
    arrays(np.float64, 4, elements=st.floats(-1e3, 1e3)),
    arrays(np.float64, 4, elements=st.floats(-1e3, 1e3)),
)
def test_backward_difference_always_finite(xp, gp, xc, gc):
    try:
        d1, guarded = backward_difference_jacobian(DifferencePair(xp, gp, xc, gc), guard=1e-9)
    except AllColumnsDegenerate:
        return
    assert np.all(np.isfinite(d1))
    for j in guarded:
        np.testing.assert_array_equal(d1[:, j], np.eye(4)[:, j])


@given(st.floats(0.1, 10), st.floats(-5, 5), st.floats(-5, 5))
def test_backward_difference_recovers_scalar_curvature(q, a, b):
    if abs(a - b) < 1e-6:
        return
    pair = DifferencePair(np.array([a]), np.array([q * a]), np.array([b]), np.array([q * b]))
    d1, _ = backward_difference_jacobian(pair)
    assert d1[0, 0] == pytest.approx(q, rel=1e-9)
