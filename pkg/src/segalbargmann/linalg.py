"""Matrix exponential by scaling and squaring with Pade approximants.

Works on a single matrix or a stack of matrices with shape (..., n, n).
Follows Higham's 2005 choice of Pade degrees and thresholds.
"""
from __future__ import annotations

import numpy as np

_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
         960960.0, 16380.0, 182.0, 1.0),
}

# largest 1-norm for which each degree meets unit roundoff
_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
          7: 9.504178996162932e-1, 9: 2.097847961257068e0,
          13: 5.371920351148152e0}


class NumericalOverflowError(ArithmeticError):
    pass


def _pade(A: np.ndarray, m: int, eye: np.ndarray):
    b = _PADE_COEFFS[m]
    A2 = A @ A
    if m < 13:
        powers = [eye, A2]
        for _ in range(2, m // 2 + 1):
            powers.append(powers[-1] @ A2)
        U = sum(b[2 * j + 1] * powers[j] for j in range(m // 2 + 1))
        V = sum(b[2 * j] * powers[j] for j in range(m // 2 + 1))
        return A @ U, V
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * eye)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * eye)
    return U, V


def expm(A) -> np.ndarray:
    """exp(A) for a square matrix or a stack of square matrices."""
    A = np.asarray(A)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {A.shape}")
    if not np.issubdtype(A.dtype, np.inexact):
        A = A.astype(float)
    n = A.shape[-1]
    if n == 0:
        return A.copy()
    if not np.all(np.isfinite(A)):
        raise NumericalOverflowError("matrix has non-finite entries")
    eye = np.eye(n, dtype=A.dtype)
    norm = np.abs(A).sum(axis=-2).max(axis=-1).max(initial=0.0)
    squarings = 0
    for m in (3, 5, 7, 9):
        if norm <= _THETA[m]:
            U, V = _pade(A, m, eye)
            break
    else:
        m = 13
        if norm > _THETA[13]:
            squarings = int(np.ceil(np.log2(norm / _THETA[13])))
        U, V = _pade(A / 2.0 ** squarings, 13, eye)
    R = np.linalg.solve(V - U, V + U)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(squarings):
            R = R @ R
    if not np.all(np.isfinite(R)):
        raise NumericalOverflowError("matrix exponential overflowed")
    return R


class SparseMatrix:
    """Square matrix in coordinate form with a fast matrix-vector product."""

    def __init__(self, n: int, rows, cols, vals):
        self.n = n
        self.rows = np.asarray(rows, dtype=np.intp)
        self.cols = np.asarray(cols, dtype=np.intp)
        self.vals = np.asarray(vals, dtype=complex)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        prod = self.vals * x[self.cols]
        return (np.bincount(self.rows, prod.real, self.n)
                + 1j * np.bincount(self.rows, prod.imag, self.n))

    def norm1(self) -> float:
        return float(np.bincount(self.cols, np.abs(self.vals), self.n).max(initial=0.0))

    def diagonal(self) -> np.ndarray:
        mask = self.rows == self.cols
        return np.bincount(self.rows[mask], self.vals[mask].real, self.n) + \
            1j * np.bincount(self.rows[mask], self.vals[mask].imag, self.n)

    def shifted(self, mu: complex) -> SparseMatrix:
        idx = np.arange(self.n)
        return SparseMatrix(self.n, np.concatenate([self.rows, idx]), np.concatenate([self.cols, idx]),
                            np.concatenate([self.vals, np.full(self.n, -mu)]))

    def toarray(self) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=complex)
        np.add.at(out, (self.rows, self.cols), self.vals)
        return out


def expm_action(M: SparseMatrix, b: np.ndarray, tol: float = 2.0 ** -53) -> np.ndarray:
    """exp(M) b by scaled truncated Taylor series, never forming exp(M)."""
    b = np.asarray(b, dtype=complex)
    if M.n == 0:
        return b.copy()
    mu = complex(M.diagonal().mean())
    A = M.shifted(mu)
    steps = max(1, int(np.ceil(A.norm1())))
    F = b.copy()
    for _ in range(steps):
        term = F.copy()
        for j in range(1, 60):
            term = A.matvec(term) / (steps * j)
            F = F + term
            if np.abs(term).max(initial=0.0) <= tol * np.abs(F).max(initial=0.0):
                break
        F = F * np.exp(mu / steps)
        if not np.all(np.isfinite(F)):
            raise NumericalOverflowError("exponential action overflowed")
    return F
