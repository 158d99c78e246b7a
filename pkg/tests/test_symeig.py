import numpy as np
import pytest
from hypothesis import given, strategies as st

from prodwave.symeig import EigenResidualError, eigh_symmetric, tridiagonal_eigvals


@given(n=st.integers(1, 20), seed=st.integers(0, 2**32 - 1), method=st.sampled_from(["jacobi", "ql"]))
def test_eigenvalues_match_numpy(n, seed, method):
    a = np.random.default_rng(seed).standard_normal((n, n))
    a = a + a.T
    w, v = eigh_symmetric(a, vectors=True, method=method)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(a)[::-1], atol=1e-10)
    assert np.all(np.diff(w) <= 0)
    np.testing.assert_allclose(v.T @ v, np.eye(n), atol=1e-10)


def test_auto_switches_to_ql_above_64():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((90, 90))
    a = a @ a.T
    w, _ = eigh_symmetric(a)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(a)[::-1], rtol=1e-11, atol=1e-9)


def test_second_difference_matrix_closed_form():
    # eigenvalues of tridiag(-1, 2, -1) of size m are 2 - 2 cos(k pi / (m + 1))
    m = 50
    w = tridiagonal_eigvals(np.full(m, 2.0), np.full(m - 1, -1.0))
    k = np.arange(1, m + 1)
    np.testing.assert_allclose(np.sort(w), np.sort(2 - 2 * np.cos(k * np.pi / (m + 1))), atol=1e-13)


def test_residual_check_rejects_bad_tolerance():
    a = np.diag([3.0, 2.0, 1.0]) + 1e-3
    with pytest.raises(EigenResidualError):
        eigh_symmetric(a, vectors=True, residual_tol=-1.0)


def test_rejects_non_square():
    with pytest.raises(ValueError):
        eigh_symmetric(np.zeros((2, 3)))
