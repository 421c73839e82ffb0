import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import small_floats, sym_eig2
from pg_orderlab.linalg import (
    DimensionError,
    RankDeficientError,
    as_matrix,
    as_vector,
    column_rank,
    first_dependent_column,
    lambda_max,
    least_squares,
    matvec,
)


def test_as_matrix_rejects_bad_input():
    with pytest.raises(DimensionError):
        as_matrix([1.0, 2.0])
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(ValueError):
        as_vector([np.inf])


def test_matvec_shape_check():
    assert np.allclose(matvec([[1, 2], [3, 4]], [1, 1]), [3, 7])
    with pytest.raises(DimensionError):
        matvec([[1, 2], [3, 4]], [1, 1, 1])


def test_rank_and_dependent_column():
    m = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 0.0], [0.0, 0.0, 1.0]])
    assert column_rank(m) == 2
    assert first_dependent_column(m) == 1
    assert first_dependent_column(np.eye(3)) is None


def test_rank_deficient_message_is_one_based():
    err = RankDeficientError(1)
    assert "column 2" in str(err)


def test_least_squares_example1():
    X = np.array([[0, -2], [-1, 0], [0, 1], [2, 0]], dtype=float)
    r = np.array([9, 8, 7, 6], dtype=float)
    w, proj, res = least_squares(X, r)
    assert np.allclose(w, [0.8, -2.2])
    assert np.allclose(proj, [4.4, -0.8, -2.2, 1.6])
    assert res == pytest.approx(np.sqrt(202.6), rel=1e-12)


def test_least_squares_rank_deficient():
    X = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    with pytest.raises(RankDeficientError):
        least_squares(X, np.ones(3))


@given(st.lists(small_floats, min_size=3, max_size=3))
def test_lambda_max_matches_closed_form(abc):
    a, b, c = abc
    m = np.array([[a, b], [b, c]])
    g = m.T @ m
    lo, hi = sym_eig2(g[0, 0], g[0, 1], g[1, 1])
    lam = lambda_max(g)
    if hi - lo >= 1e-3 * hi:
        assert lam == pytest.approx(hi, rel=1e-9, abs=1e-9)
    else:
        # Near-equal eigenvalues: power iteration may stall, but stays inside the spectrum.
        assert lo - 1e-9 <= lam <= hi + 1e-9


def test_lambda_max_prop2_gram():
    X = np.array([[0.0, -2.0], [-10.0, 4.0], [0.0, 1.0]])
    g = X.T @ X
    assert lambda_max(g) == pytest.approx(sym_eig2(g[0, 0], g[0, 1], g[1, 1])[1], rel=1e-12)


@settings(max_examples=30)
@given(st.integers(1, 6), st.integers(0, 2**31))
def test_lambda_max_bounds_rayleigh_quotients(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n + 2, n))
    g = a.T @ a
    lam = lambda_max(g)
    for v in rng.normal(size=(100, n)):
        assert lam >= (v @ g @ v) / (v @ v) - 1e-9


def test_lambda_max_edge_cases():
    assert lambda_max(np.zeros((3, 3))) == 0.0
    assert lambda_max(np.diag([1.0, 5.0, 2.0])) == pytest.approx(5.0)
    with pytest.raises(DimensionError):
        lambda_max(np.ones((2, 3)))


@settings(max_examples=50)
@given(st.integers(2, 6), st.integers(1, 5), st.integers(0, 2**31))
def test_least_squares_residual_orthogonal(K, d, seed):
    d = min(d, K)
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(K, d))
    b = rng.normal(size=K)
    w, proj, res = least_squares(X, b)
    assert np.allclose(X.T @ (b - proj), 0, atol=1e-8)
    assert res == pytest.approx(np.linalg.norm(b - proj), abs=1e-10)
    ref, *_ = np.linalg.lstsq(X, b, rcond=None)
    assert np.allclose(w, ref, atol=1e-7)
