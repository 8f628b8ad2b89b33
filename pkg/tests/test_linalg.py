import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from segalbargmann import NumericalOverflowError, expm
from segalbargmann.linalg import SparseMatrix, expm_action


def _rel(a, b):
    return np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b)))


@pytest.mark.parametrize("scale", [1e-6, 0.01, 0.3, 1.0, 5.0, 40.0])
def test_expm_matches_scipy(scale, rng):
    for n in (1, 2, 5, 12):
        A = scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        assert _rel(expm(A), sla.expm(A)) < 1e-12


@given(arrays(np.float64, (4, 4), elements=st.floats(-3, 3)))
def test_expm_real_matches_scipy(A):
    assert _rel(expm(A), sla.expm(A)) < 1e-12


def test_expm_nonnormal_and_nilpotent():
    N = np.diag(np.ones(5), 1)
    E = expm(N)
    expected = sum(np.linalg.matrix_power(N, k) / math.factorial(k) for k in range(6))
    assert np.allclose(E, expected, atol=1e-14)
    J = np.array([[-1.0, 1e4], [0, -1.0]])
    assert _rel(expm(J), sla.expm(J)) < 1e-12


def test_expm_batched(rng):
    A = rng.standard_normal((7, 3, 3))
    E = expm(A)
    for i in range(7):
        assert _rel(E[i], sla.expm(A[i])) < 1e-12


def test_expm_errors():
    with pytest.raises(ValueError):
        expm(np.ones((2, 3)))
    with pytest.raises(NumericalOverflowError):
        expm(np.array([[np.nan]]))
    with pytest.raises(NumericalOverflowError):
        expm(np.array([[1000.0]]))


def _random_sparse(rng, n, density=0.2, scale=1.0):
    mask = rng.random((n, n)) < density
    rows, cols = np.nonzero(mask)
    vals = scale * (rng.standard_normal(len(rows)) + 1j * rng.standard_normal(len(rows)))
    return SparseMatrix(n, rows, cols, vals)


def test_sparse_matrix_operations(rng):
    M = _random_sparse(rng, 9)
    D = M.toarray()
    x = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    assert np.allclose(M.matvec(x), D @ x)
    assert np.isclose(M.norm1(), np.linalg.norm(D, 1))
    assert np.allclose(M.diagonal(), np.diag(D))
    assert np.allclose(M.shifted(2 - 1j).toarray(), D - (2 - 1j) * np.eye(9))


def test_duplicate_entries_accumulate():
    M = SparseMatrix(2, [0, 0], [1, 1], [1.0, 2.0])
    assert M.toarray()[0, 1] == 3


@pytest.mark.parametrize("scale", [0.1, 1.0, 6.0])
def test_expm_action_matches_dense(scale, rng):
    for n in (1, 10, 40):
        M = _random_sparse(rng, n, scale=scale)
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        expected = sla.expm(M.toarray()) @ b
        assert _rel(expm_action(M, b), expected) < 1e-11


def test_expm_action_large_diagonal_shift(rng):
    n = 20
    M = _random_sparse(rng, n).shifted(30)
    b = rng.standard_normal(n)
    assert _rel(expm_action(M, b), sla.expm(M.toarray()) @ b) < 1e-11
