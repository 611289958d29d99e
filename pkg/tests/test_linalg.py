import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import rel_err, spd
from ocopt.linalg import (
    NoConvergence,
    ShapeError,
    SingularMatrix,
    geometric_sum_apply,
    is_symmetric_pd,
    lu_solve,
    matrix_power,
    spectral_radius,
    spectral_radius_closed_form,
)


def test_lu_solve_identity(rng):
    b = rng.standard_normal((3, 2))
    np.testing.assert_array_equal(lu_solve(np.eye(3), b), b)


def test_lu_solve_diagonal():
    x = lu_solve(np.diag([2.0, 4.0]), np.array([[2.0], [8.0]]))
    np.testing.assert_allclose(x, [[1.0], [2.0]], rtol=0, atol=1e-15)


def test_lu_solve_vector_rhs():
    x = lu_solve([[0.0, 1.0], [1.0, 0.0]], [3.0, 5.0])
    assert x.shape == (2,)
    np.testing.assert_allclose(x, [5.0, 3.0])


def test_lu_solve_rank_deficient():
    with pytest.raises(SingularMatrix):
        lu_solve([[1.0, 1.0], [1.0, 1.0]], [[1.0], [0.0]])


def test_lu_solve_zero_matrix():
    with pytest.raises(SingularMatrix):
        lu_solve(np.zeros((2, 2)), [1.0, 1.0])


def test_lu_solve_shape_mismatch():
    with pytest.raises(ShapeError):
        lu_solve(np.eye(3), np.ones(2))
    with pytest.raises(ShapeError):
        lu_solve(np.ones((2, 3)), np.ones(2))


def test_lu_solve_needs_pivoting():
    # zero leading entry: fails without row exchanges
    a = np.array([[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]])
    b = np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(a @ lu_solve(a, b), b, atol=1e-14)


def test_lu_solve_random_residuals(rng):
    for _ in range(100):
        n = int(rng.integers(1, 9))
        u, _ = np.linalg.qr(rng.standard_normal((n, n)))
        v, _ = np.linalg.qr(rng.standard_normal((n, n)))
        sv = np.logspace(0, rng.uniform(0, 6), n)   # condition number <= 1e6
        a = (u * sv) @ v.T
        b = rng.standard_normal((n, int(rng.integers(1, 4))))
        x = lu_solve(a, b)
        assert np.max(np.abs(a @ x - b)) <= 1e-10 * (1 + np.max(np.abs(b)))


def test_matrix_power_zero_is_identity(rng):
    np.testing.assert_array_equal(matrix_power(rng.standard_normal((4, 4)), 0), np.eye(4))


def test_matrix_power_diagonal():
    np.testing.assert_allclose(matrix_power(np.diag([0.5, 0.25]), 3),
                               np.diag([0.125, 0.015625]), rtol=0, atol=0)


def test_matrix_power_nilpotent():
    np.testing.assert_array_equal(matrix_power([[0.0, 1.0], [0.0, 0.0]], 2), np.zeros((2, 2)))


def test_matrix_power_negative_exponent():
    with pytest.raises(ValueError):
        matrix_power(np.eye(2), -1)


@given(
    arrays(np.float64, (3, 3), elements=st.floats(-1, 1)),
    st.integers(0, 8),
    st.integers(0, 8),
)
def test_matrix_power_additive(a, p, q):
    lhs = matrix_power(a, p + q)
    rhs = matrix_power(a, p) @ matrix_power(a, q)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))


@given(arrays(np.float64, (3, 3), elements=st.floats(-1, 1)), st.integers(0, 12))
def test_matrix_power_matches_repeated_product(a, p):
    expected = np.eye(3)
    for _ in range(p):
        expected = expected @ a
    assert np.max(np.abs(matrix_power(a, p) - expected)) <= 1e-12 * max(1.0, np.max(np.abs(expected)))


def test_geometric_sum_single_term(rng):
    a, c = rng.standard_normal((3, 3)), rng.standard_normal((3, 3))
    v = rng.standard_normal(3)
    np.testing.assert_array_equal(geometric_sum_apply(a, c, v, 0), c @ v)


def test_geometric_sum_scalar_series():
    # 0.5 + 0.25 + 0.125
    assert geometric_sum_apply([[0.5]], [[0.5]], [1.0], 2) == pytest.approx([0.875], abs=0)


def test_geometric_sum_nilpotent_tail(rng):
    c, v = rng.standard_normal((2, 2)), rng.standard_normal(2)
    np.testing.assert_array_equal(geometric_sum_apply(np.zeros((2, 2)), c, v, 5), c @ v)


def test_geometric_sum_shape_mismatch():
    with pytest.raises(ShapeError):
        geometric_sum_apply(np.eye(2), np.eye(3), np.ones(2), 1)


@pytest.mark.parametrize("r", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("m", range(13))
def test_series_identity(r, m, rng):
    # sum_i [(R+H)^-1 R]^i (R+H)^-1 v == [I - ((R+H)^-1 R)^{m+1}] H^-1 v
    n = 4
    h = spd(n, rng)
    v = rng.standard_normal(n)
    rh = r * np.eye(n) + h
    # independent route: explicit inverses from numpy
    a_np = np.linalg.inv(rh) * r
    closed = (np.eye(n) - np.linalg.matrix_power(a_np, m + 1)) @ np.linalg.solve(h, v)
    a = lu_solve(rh, r * np.eye(n))
    series = geometric_sum_apply(a, np.eye(n), lu_solve(rh, v), m)
    assert rel_err(series, closed) <= 1e-10


def test_spectral_radius_identity():
    assert spectral_radius(np.eye(2)) == pytest.approx(1.0, abs=1e-12)
    assert spectral_radius(np.eye(4)) == pytest.approx(1.0, abs=1e-12)


def test_spectral_radius_diagonal():
    assert spectral_radius(np.diag([0.3, 0.7])) == pytest.approx(0.7, abs=1e-12)
    assert spectral_radius(np.diag([0.3, 0.7]), method="power") == pytest.approx(0.7, abs=1e-10)


def test_spectral_radius_scalar_ratio():
    # (R+H)^-1 R with R = H = 1 is r / (r + h) = 0.5
    a = lu_solve([[2.0]], [[1.0]])
    assert spectral_radius(a) == pytest.approx(0.5, abs=1e-15)


@given(arrays(np.float64, st.integers(1, 6), elements=st.floats(-10, 10)))
def test_spectral_radius_of_diag(d):
    for method in ("auto", "power"):
        assert abs(spectral_radius(np.diag(d), method=method) - np.max(np.abs(d))) <= 1e-10


def test_spectral_radius_matches_numpy_on_similar_to_symmetric(rng):
    for n in (2, 3, 5):
        h = spd(n, rng)
        r = spd(n, rng)
        a = lu_solve(r + h, r)
        expected = np.max(np.abs(np.linalg.eigvals(a)))
        assert spectral_radius(a) == pytest.approx(expected, rel=1e-9)


def test_closed_form_complex_pair():
    rot = np.array([[0.0, -2.0], [2.0, 0.0]])
    assert spectral_radius_closed_form(rot) == pytest.approx(2.0)
    a = np.array([[1.0, 10.0], [-0.1, 1.0]])
    assert spectral_radius_closed_form(a) == pytest.approx(np.sqrt(2.0))


def test_closed_form_mixed_signs():
    assert spectral_radius_closed_form(np.diag([0.2, -0.9])) == pytest.approx(0.9)
    assert spectral_radius_closed_form([[1.0, 2.0], [3.0, 4.0]]) == pytest.approx(
        np.max(np.abs(np.linalg.eigvals([[1.0, 2.0], [3.0, 4.0]]))))


def test_power_iteration_dominant_complex_pair():
    a = np.zeros((3, 3))
    a[:2, :2] = [[1.0, 10.0], [-0.1, 1.0]]
    a[2, 2] = 0.1
    with pytest.raises(NoConvergence):
        spectral_radius(a, method="power")


def test_contraction_radius_below_one(rng):
    for n in range(1, 6):
        h = spd(n, rng)
        for r in (0.1, 1.0, 10.0):
            a = lu_solve(r * np.eye(n) + h, r * np.eye(n))
            assert spectral_radius(a) < 1.0


def test_is_symmetric_pd_examples():
    assert is_symmetric_pd(np.eye(3), 1e-12)
    assert not is_symmetric_pd(np.diag([1.0, -1.0]), 1e-12)
    assert not is_symmetric_pd([[1.0, 2.0], [0.0, 1.0]], 1e-12)
    assert not is_symmetric_pd([[1.0, 2.0], [2.0, 1.0]], 1e-12)


def test_is_symmetric_pd_contraction_product(rng):
    # ((R+H)^-1 R)^2 H^-1 is symmetric positive definite for SPD H and R = I
    for n in range(1, 6):
        h = spd(n, rng)
        a = lu_solve(np.eye(n) + h, np.eye(n))
        prod = matrix_power(a, 2) @ lu_solve(h, np.eye(n))
        assert is_symmetric_pd(prod, 1e-10)
