"""Matrix realizations of SO(N), SU(N), U(N) and Sp(N).

Provides orthonormal Lie-algebra bases, the quadratic basis sums
("magic" sums) with their closed forms, random group elements, finite
difference oracles for left-invariant derivatives, and the quaternionic
picture of Sp(N).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .linalg import expm
from .tracepoly import RationalComplex

FAMILY_ALIASES = {"so": "so", "1": "so", "su": "su", "2": "su", "u": "u", "2'": "u",
                  "sp": "sp", "4": "sp"}
BETA = {"so": "1", "su": "2", "u": "2'", "sp": "4"}
MAGIC_KINDS = ("XX", "XAX", "trXA_X", "trXA_trXB")


def omega(N: int) -> np.ndarray:
    """Block diagonal symplectic form diag(W, ..., W) with W = [[0, 1], [-1, 0]]."""
    return np.kron(np.eye(N), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def ntrace(A: np.ndarray) -> complex:
    """Trace divided by the matrix size (tr for N x N, w-tr for 2N x 2N)."""
    return np.trace(A, axis1=-2, axis2=-1) / A.shape[-1]


@dataclass(frozen=True)
class GroupSpec:
    family: str
    N: int

    def __post_init__(self):
        fam = FAMILY_ALIASES.get(str(self.family).lower())
        if fam is None:
            raise ValueError(f"unknown family {self.family!r}")
        object.__setattr__(self, "family", fam)
        low = 2 if fam in ("so", "su") else 1
        if not isinstance(self.N, (int, np.integer)) or self.N < low:
            raise ValueError(f"{fam} needs N >= {low}")
        object.__setattr__(self, "N", int(self.N))

    def __str__(self):
        return f"{self.family.upper()}({self.N})"

    @property
    def beta(self) -> str:
        return BETA[self.family]

    @property
    def matrix_dim(self) -> int:
        return 2 * self.N if self.family == "sp" else self.N

    @property
    def algebra_dim(self) -> int:
        N = self.N
        return {"so": N * (N - 1) // 2, "su": N * N - 1, "u": N * N,
                "sp": N * (2 * N + 1)}[self.family]

    @cached_property
    def basis(self) -> np.ndarray:
        """Orthonormal basis of the compact Lie algebra, shape (dim, d, d)."""
        out = _BASIS_BUILDERS[self.family](self.N)
        out.setflags(write=False)
        return out

    def inner(self, X: np.ndarray, Y: np.ndarray) -> float:
        hs = np.trace(X @ Y.conj().T).real
        return (self.N / 2 if self.family == "so" else self.N) * hs

    def in_algebra(self, X: np.ndarray, atol: float = 1e-12) -> bool:
        skew = np.allclose(X.conj().T, -X, atol=atol)
        if self.family == "so":
            return skew and np.allclose(X.imag, 0, atol=atol)
        if self.family == "su":
            return skew and abs(np.trace(X)) < atol
        if self.family == "u":
            return skew
        W = omega(self.N)
        return skew and np.allclose(W @ X.T @ W, X, atol=atol)

    def in_group(self, A: np.ndarray, atol: float = 1e-10, complexified: bool = False) -> bool:
        d = self.matrix_dim
        eye = np.eye(d)
        ok = True
        if not complexified:
            ok = np.allclose(A.conj().T @ A, eye, atol=atol)
        if self.family == "so":
            ok = ok and np.allclose(A.T @ A, eye, atol=atol) and abs(np.linalg.det(A) - 1) < atol
            if not complexified:
                ok = ok and np.allclose(A.imag, 0, atol=atol)
        elif self.family == "su":
            ok = ok and abs(np.linalg.det(A) - 1) < atol
        elif self.family == "sp":
            W = omega(self.N)
            ok = ok and np.allclose(A.T @ W @ A, W, atol=atol)
        return bool(ok)

    def transpose_like(self, A: np.ndarray) -> np.ndarray:
        """A^T for SO, Omega A^T Omega^-1 for Sp (the inverse on the group)."""
        if self.family == "sp":
            W = omega(self.N)
            return W @ A.T @ W.T
        return A.T


def _so_basis(N):
    out = []
    for i in range(N):
        for j in range(i + 1, N):
            X = np.zeros((N, N), dtype=complex)
            X[i, j], X[j, i] = 1, -1
            out.append(X / np.sqrt(N))
    return np.array(out)


def _su_basis(N):
    out = []
    for a in range(N):
        for b in range(a + 1, N):
            X = np.zeros((N, N), dtype=complex)
            X[a, b], X[b, a] = 1, -1
            out.append(X / np.sqrt(2 * N))
            Y = np.zeros((N, N), dtype=complex)
            Y[a, b] = Y[b, a] = 1j
            out.append(Y / np.sqrt(2 * N))
    # orthonormalize the traceless diagonals e_k - e_{k+1}
    diffs = np.zeros((N, N - 1))
    for k in range(N - 1):
        diffs[k, k], diffs[k + 1, k] = 1, -1
    q, _ = np.linalg.qr(diffs)
    for k in range(N - 1):
        out.append(1j * np.diag(q[:, k]) / np.sqrt(N))
    return np.array(out).reshape(-1, N, N)


def _u_basis(N):
    extra = (1j / N) * np.eye(N)[None]
    if N == 1:
        return extra.astype(complex)
    return np.concatenate([_su_basis(N), extra])


def _sp_basis(N):
    return np.array([phi_map(Q) for Q in quaternion_sp_basis(N)])


_BASIS_BUILDERS = {"so": _so_basis, "su": _su_basis, "u": _u_basis, "sp": _sp_basis}


# magic sums

def magic_sum(spec: GroupSpec, kind: str, A=None, B=None, basis: np.ndarray | None = None):
    """Literal sum over an orthonormal basis (the group's own basis unless ``basis`` is given)."""
    X = spec.basis if basis is None else basis
    d = spec.matrix_dim
    if kind == "XX":
        return np.einsum("nij,njk->ik", X, X)
    A = np.asarray(A, dtype=complex)
    if A.shape != (d, d):
        raise ValueError(f"expected a {d}x{d} matrix, got {A.shape}")
    if kind == "XAX":
        return np.einsum("nij,jk,nkl->il", X, A, X)
    trXA = np.einsum("nij,ji->n", X, A) / d
    if kind == "trXA_X":
        return np.einsum("n,nij->ij", trXA, X)
    if kind == "trXA_trXB":
        B = np.asarray(B, dtype=complex)
        if B.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got {B.shape}")
        trXB = np.einsum("nij,ji->n", X, B) / d
        return complex(np.sum(trXA * trXB))
    raise ValueError(f"unknown magic sum {kind!r}")


def magic_closed_form(spec: GroupSpec, kind: str, A=None, B=None):
    N, d = spec.N, spec.matrix_dim
    eye = np.eye(d)
    fam = spec.family
    if kind == "XX":
        c = {"so": -1 + 1 / N, "su": -1 + 1 / N**2, "u": -1.0, "sp": -1 - 1 / (2 * N)}[fam]
        return c * eye
    A = np.asarray(A, dtype=complex)
    At = spec.transpose_like(A) if fam in ("so", "sp") else None
    if kind == "XAX":
        return {"so": lambda: At / N - ntrace(A) * eye,
                "su": lambda: -ntrace(A) * eye + A / N**2,
                "u": lambda: -ntrace(A) * eye,
                "sp": lambda: -At / (2 * N) - ntrace(A) * eye}[fam]()
    if kind == "trXA_X":
        return {"so": lambda: (At - A) / N**2,
                "su": lambda: -A / N**2 + ntrace(A) * eye / N**2,
                "u": lambda: -A / N**2,
                "sp": lambda: (At - A) / (4 * N**2)}[fam]()
    if kind == "trXA_trXB":
        B = np.asarray(B, dtype=complex)
        return complex({"so": lambda: (ntrace(At @ B) - ntrace(A @ B)) / N**2,
                        "su": lambda: -ntrace(A @ B) / N**2 + ntrace(A) * ntrace(B) / N**2,
                        "u": lambda: -ntrace(A @ B) / N**2,
                        "sp": lambda: (ntrace(At @ B) - ntrace(A @ B)) / (4 * N**2)}[fam]())
    raise ValueError(f"unknown magic sum {kind!r}")


def rotate_basis(basis: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Apply a random real orthogonal change of basis."""
    n = len(basis)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    return np.einsum("ij,jkl->ikl", q, basis)


# random elements

def random_algebra_element(spec: GroupSpec, rng: np.random.Generator, scale: float = 1.0,
                           complexified: bool = False) -> np.ndarray:
    coeffs = rng.standard_normal(spec.algebra_dim)
    if complexified:
        coeffs = coeffs + 1j * rng.standard_normal(spec.algebra_dim)
    return scale * np.einsum("n,nij->ij", coeffs, spec.basis)


def random_group_element(spec: GroupSpec, rng: np.random.Generator, spread: float = 1.0,
                         complexified: bool = False, factors: int = 3) -> np.ndarray:
    """Product of exponentials of random Lie-algebra elements.

    With ``complexified`` the exponents have complex coefficients, giving an
    element of SO(N,C), SL(N,C), GL(N,C) or Sp(N,C).
    """
    if spread <= 0:
        raise ValueError("spread must be positive")
    A = np.eye(spec.matrix_dim, dtype=complex)
    for _ in range(factors):
        A = A @ expm(random_algebra_element(spec, rng, spread, complexified))
    return A


# finite-difference oracles

def fd_vector_field(f: Callable, A: np.ndarray, X: np.ndarray, h: float = 1e-3):
    """Central difference of t -> f(A exp(tX)) at t = 0."""
    return (f(A @ expm(h * X)) - f(A @ expm(-h * X))) / (2 * h)


def fd_second(f: Callable, A: np.ndarray, X: np.ndarray, h: float = 1e-3, f0=None):
    """Three-point second difference of t -> f(A exp(tX)) at t = 0."""
    f0 = f(A) if f0 is None else f0
    return (f(A @ expm(h * X)) - 2 * f0 + f(A @ expm(-h * X))) / h**2


def fd_laplacian(f: Callable, A: np.ndarray, spec: GroupSpec, h: float = 1e-3,
                 richardson: bool = False, basis: np.ndarray | None = None):
    """Sum over the orthonormal basis of second left-invariant derivatives."""
    X = spec.basis if basis is None else basis
    f0 = f(A)
    total = sum(fd_second(f, A, Xj, h, f0) for Xj in X)
    if richardson:
        fine = sum(fd_second(f, A, Xj, h / 2, f0) for Xj in X)
        total = (4 * fine - total) / 3
    return total


def fd_generator(f: Callable, A: np.ndarray, spec: GroupSpec, params, h: float = 1e-3):
    """Finite-difference value of the complex-time generator A_{s,tau} f at A.

    A_{s,tau} = sum_j (s - t/2) X_j^2 + (t/2) Y_j^2 - theta X_j Y_j with
    Y_j = i X_j.  Since X_j and Y_j commute, f(A exp(xX + yY)) is sampled
    on a 2-D stencil.
    """
    s, t, theta = params.s, params.t, params.theta
    f0 = f(A)
    total = 0
    for X in spec.basis:
        g = lambda x, y: f(A @ expm((x + 1j * y) * X))
        xx = (g(h, 0) - 2 * f0 + g(-h, 0)) / h**2
        yy = (g(0, h) - 2 * f0 + g(0, -h)) / h**2
        xy = (g(h, h) - g(h, -h) - g(-h, h) + g(-h, -h)) / (4 * h**2)
        total = total + (s - t / 2) * xx + (t / 2) * yy - theta * xy
    return total


# quaternions

@dataclass(frozen=True)
class Quaternion:
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def __mul__(self, o: Quaternion) -> Quaternion:
        a1, b1, c1, d1 = self.a, self.b, self.c, self.d
        a2, b2, c2, d2 = o.a, o.b, o.c, o.d
        return Quaternion(a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
                          a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
                          a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
                          a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2)

    def __add__(self, o: Quaternion) -> Quaternion:
        return Quaternion(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)

    def conj(self) -> Quaternion:
        return Quaternion(self.a, -self.b, -self.c, -self.d)

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d], dtype=float)


QUAT_UNITS = {"1": Quaternion(1, 0, 0, 0), "i": Quaternion(0, 1, 0, 0),
              "j": Quaternion(0, 0, 1, 0), "k": Quaternion(0, 0, 0, 1)}


def psi_map(q) -> np.ndarray:
    """Embed a quaternion a + bi + cj + dk as [[a+di, -b-ci], [b-ci, a-di]]."""
    a, b, c, d = (q.a, q.b, q.c, q.d) if isinstance(q, Quaternion) else q
    return np.array([[a + 1j * d, -b - 1j * c], [b - 1j * c, a - 1j * d]])


def psi_exact(q) -> np.ndarray:
    """psi with exact rational complex entries (object array)."""
    a, b, c, d = (Fraction(x) for x in ((q.a, q.b, q.c, q.d) if isinstance(q, Quaternion) else q))
    R = RationalComplex
    return np.array([[R(a, d), R(-b, -c)], [R(b, -c), R(a, -d)]], dtype=object)


class QuaternionMatrix:
    """N x N quaternion matrix stored as four real N x N component arrays."""

    __slots__ = ("parts",)

    def __init__(self, parts):
        parts = np.asarray(parts, dtype=float)
        if parts.ndim != 3 or parts.shape[0] != 4 or parts.shape[1] != parts.shape[2]:
            raise ValueError("expected component array of shape (4, N, N)")
        self.parts = parts

    @classmethod
    def zeros(cls, N: int) -> QuaternionMatrix:
        return cls(np.zeros((4, N, N)))

    @classmethod
    def identity(cls, N: int) -> QuaternionMatrix:
        p = np.zeros((4, N, N))
        p[0] = np.eye(N)
        return cls(p)

    @classmethod
    def unit_times(cls, unit: str, M: np.ndarray) -> QuaternionMatrix:
        p = np.zeros((4,) + M.shape)
        p["1ijk".index(unit)] = M
        return cls(p)

    @property
    def N(self) -> int:
        return self.parts.shape[1]

    def __matmul__(self, o: QuaternionMatrix) -> QuaternionMatrix:
        a1, b1, c1, d1 = self.parts
        a2, b2, c2, d2 = o.parts
        return QuaternionMatrix([a1 @ a2 - b1 @ b2 - c1 @ c2 - d1 @ d2,
                                 a1 @ b2 + b1 @ a2 + c1 @ d2 - d1 @ c2,
                                 a1 @ c2 - b1 @ d2 + c1 @ a2 + d1 @ b2,
                                 a1 @ d2 + b1 @ c2 - c1 @ b2 + d1 @ a2])

    def __add__(self, o: QuaternionMatrix) -> QuaternionMatrix:
        return QuaternionMatrix(self.parts + o.parts)

    def __sub__(self, o: QuaternionMatrix) -> QuaternionMatrix:
        return QuaternionMatrix(self.parts - o.parts)

    def scale(self, r: float) -> QuaternionMatrix:
        return QuaternionMatrix(r * self.parts)

    __rmul__ = lambda self, r: self.scale(r)

    def adjoint(self) -> QuaternionMatrix:
        a, b, c, d = self.parts
        return QuaternionMatrix([a.T, -b.T, -c.T, -d.T])

    def re_trace(self) -> float:
        """Real part of the trace divided by N."""
        return float(np.trace(self.parts[0])) / self.N

    def inverse(self) -> QuaternionMatrix:
        return phi_inverse(np.linalg.inv(phi_map(self)))

    def power(self, n: int) -> QuaternionMatrix:
        base = self if n >= 0 else self.inverse()
        out = QuaternionMatrix.identity(self.N)
        for _ in range(abs(n)):
            out = out @ base
        return out

    def allclose(self, o: QuaternionMatrix, atol: float = 1e-10) -> bool:
        return np.allclose(self.parts, o.parts, atol=atol)


def phi_map(M) -> np.ndarray:
    """Replace each quaternion entry by its 2 x 2 complex block."""
    if isinstance(M, Quaternion):
        return psi_map(M)
    a, b, c, d = M.parts
    N = M.N
    out = np.zeros((2 * N, 2 * N), dtype=complex)
    out[0::2, 0::2] = a + 1j * d
    out[0::2, 1::2] = -b - 1j * c
    out[1::2, 0::2] = b - 1j * c
    out[1::2, 1::2] = a - 1j * d
    return out


def phi_inverse(Z: np.ndarray, atol: float = 1e-9) -> QuaternionMatrix:
    """Recover the quaternion matrix from a 2N x 2N complex matrix in the image of phi."""
    alpha = Z[0::2, 0::2]
    beta = -Z[0::2, 1::2]
    if not (np.allclose(Z[1::2, 1::2], alpha.conj(), atol=atol)
            and np.allclose(Z[1::2, 0::2], beta.conj(), atol=atol)):
        raise ValueError("matrix is not in the image of the quaternionic embedding")
    # alpha = a + di, beta = b + ci
    return QuaternionMatrix([alpha.real, beta.real, beta.imag, alpha.imag])


def quaternion_sp_basis(N: int) -> list[QuaternionMatrix]:
    """Orthonormal basis of the quaternionic skew-Hermitian matrices."""
    out = []
    for a in range(N):
        for b in range(a + 1, N):
            M = np.zeros((N, N))
            M[a, b], M[b, a] = 1, -1
            out.append(QuaternionMatrix.unit_times("1", M / np.sqrt(4 * N)))
    sym = []
    for a in range(N):
        for b in range(a + 1, N):
            M = np.zeros((N, N))
            M[a, b] = M[b, a] = 1
            sym.append(M / np.sqrt(4 * N))
    for a in range(N):
        M = np.zeros((N, N))
        M[a, a] = 1
        sym.append(M / np.sqrt(2 * N))
    for unit in "ijk":
        out.extend(QuaternionMatrix.unit_times(unit, M) for M in sym)
    return out


def quaternion_inner(X: QuaternionMatrix, Y: QuaternionMatrix) -> float:
    """2N Re Tr(X^* Y)."""
    return 2 * X.N * (X.adjoint() @ Y).re_trace() * X.N


def quaternion_magic_sum(kind: str, N: int, A: QuaternionMatrix | None = None,
                         B: QuaternionMatrix | None = None,
                         basis: Sequence[QuaternionMatrix] | None = None):
    """Basis sums computed purely in quaternion arithmetic."""
    basis = quaternion_sp_basis(N) if basis is None else basis
    if kind == "XX":
        out = QuaternionMatrix.zeros(N)
        for X in basis:
            out = out + X @ X
        return out
    if kind == "XAX":
        out = QuaternionMatrix.zeros(N)
        for X in basis:
            out = out + X @ A @ X
        return out
    if kind == "trXA_X":
        out = QuaternionMatrix.zeros(N)
        for X in basis:
            out = out + (X @ A).re_trace() * X
        return out
    if kind == "trXA_trXB":
        return sum((X @ A).re_trace() * (X @ B).re_trace() for X in basis)
    raise ValueError(f"unknown magic sum {kind!r}")


def quaternion_magic_closed_form(kind: str, N: int, A: QuaternionMatrix | None = None,
                                 B: QuaternionMatrix | None = None):
    eye = QuaternionMatrix.identity(N)
    if kind == "XX":
        return (-1 - 1 / (2 * N)) * eye
    if kind == "XAX":
        return (-1 / (2 * N)) * A.adjoint() - A.re_trace() * eye
    if kind == "trXA_X":
        return (1 / (4 * N**2)) * (A.adjoint() - A)
    if kind == "trXA_trXB":
        return ((A.adjoint() @ B).re_trace() - (A @ B).re_trace()) / (4 * N**2)
    raise ValueError(f"unknown magic sum {kind!r}")


def random_quaternion_matrix(N: int, rng: np.random.Generator) -> QuaternionMatrix:
    return QuaternionMatrix(rng.standard_normal((4, N, N)))


def random_quaternion_unitary(N: int, rng: np.random.Generator, spread: float = 1.0) -> QuaternionMatrix:
    """Element of the quaternionic unitary group built by exponentiating in M_2N(C)."""
    spec = GroupSpec("sp", N)
    return phi_inverse(random_group_element(spec, rng, spread))


def counterexample_sums():
    """Sum_Y Y B Y over the sp(1) basis versus the quaternionic closed form, exactly.

    B = [[1, 0], [1, 1]] lies in Sp(1, C) but not in the image of the
    quaternionic embedding, and the two sides differ.
    """
    R = RationalComplex
    B = np.array([[R(1), R(0)], [R(1), R(1)]], dtype=object)
    lhs = np.array([[R(0), R(0)], [R(0), R(0)]], dtype=object)
    # the sp(1) basis is psi(q)/sqrt(2) for q in {i, j, k}; the 1/2 is exact
    for unit in "ijk":
        Y = psi_exact(QUAT_UNITS[unit])
        lhs = lhs + Y.dot(B).dot(Y)
    lhs = lhs * R(Fraction(1, 2))
    B_adj = np.array([[B[j, i].conjugate() for j in range(2)] for i in range(2)], dtype=object)
    wtr = (B[0, 0] + B[1, 1]) * R(Fraction(1, 2))
    eye = np.array([[R(1), R(0)], [R(0), R(1)]], dtype=object)
    rhs = B_adj * R(Fraction(-1, 2)) - eye * wtr
    return lhs, rhs
