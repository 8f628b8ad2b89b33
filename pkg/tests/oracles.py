"""Independent reference implementations used only by the tests.

Polynomials here are plain dicts {(u_exp, ((k, e), ...)): coeff} and every
operator is built by literally composing projections, multiplications and
partial derivatives.  Nothing is shared with the package code.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def from_tp(P) -> dict:
    return {(m.u, tuple(m.v)): c for m, c in P.terms.items()}


def to_tp(d: dict):
    from segalbargmann import Monomial, TracePolynomial
    return TracePolynomial([(Monomial(u, v), c) for (u, v), c in d.items() if c != 0])


def _clean(d: dict) -> dict:
    return {k: c for k, c in d.items() if c != 0}


def add(*polys, coeffs=None) -> dict:
    out: dict = {}
    coeffs = coeffs or [1] * len(polys)
    for c, P in zip(coeffs, polys):
        for k, v in P.items():
            out[k] = out.get(k, 0) + c * v
    return _clean(out)


def _vdict(v):
    return dict(v)


def _vtuple(d):
    return tuple(sorted((k, e) for k, e in d.items() if e))


# building blocks

def R_plus(P):
    return {k: c for k, c in P.items() if k[0] >= 0}


def R_minus(P):
    return {k: c for k, c in P.items() if k[0] < 0}


def M_u(P, n):
    return {(u + n, v): c for (u, v), c in P.items()}


def d_u(P):
    return _clean({(u - 1, v): u * c for (u, v), c in P.items()})


def d_v(P, k):
    out: dict = {}
    for (u, v), c in P.items():
        d = _vdict(v)
        e = d.get(k, 0)
        if e:
            d[k] = e - 1
            key = (u, _vtuple(d))
            out[key] = out.get(key, 0) + e * c
    return _clean(out)


def mul_v(P, k):
    # v_0 is the normalized trace of the identity, i.e. 1
    if k == 0:
        return dict(P)
    out: dict = {}
    for (u, v), c in P.items():
        d = _vdict(v)
        d[k] = d.get(k, 0) + 1
        key = (u, _vtuple(d))
        out[key] = out.get(key, 0) + c
    return out


def scale(P, c):
    return _clean({k: c * v for k, v in P.items()})


def degree(P) -> int:
    return max((abs(u) + sum(abs(k) * e for k, e in v) for u, v in P), default=0)


# operator definitions, truncated to the keys that can act on P

def _keys(P):
    m = degree(P) + 2
    return [k for k in range(-m, m + 1) if k]


def N0(P):
    return add(*[scale(mul_v(d_v(P, k), k), abs(k)) for k in _keys(P)])


def N1(P):
    return add(M_u(d_u(R_plus(P)), 1), M_u(d_u(R_minus(P)), 1), coeffs=[1, -1])


def _Y1_branch(P, R, ks):
    return add(*[mul_v(M_u(R(d_u(M_u(R(P), -k))), 1), k) for k in ks])


def Y1p(P):
    return _Y1_branch(P, R_plus, [k for k in _keys(P) if k >= 1])


def Y1m(P):
    return _Y1_branch(P, R_minus, [k for k in _keys(P) if k <= -1])


def _Z2_branch(P, R, ks):
    return add(*[M_u(R(d_u(M_u(R(P), -k))), -k + 1) for k in ks])


def Z2p(P):
    return _Z2_branch(P, R_plus, [k for k in _keys(P) if k >= 1])


def Z2m(P):
    return _Z2_branch(P, R_minus, [k for k in _keys(P) if k <= -1])


def _inner_range(k):
    return range(1, k) if k > 0 else range(k + 1, 0)


def Y2p(P):
    return add(*[scale(mul_v(mul_v(d_v(P, k), j), k - j), j)
                 for k in _keys(P) if k >= 2 for j in _inner_range(k)])


def Y2m(P):
    return add(*[scale(mul_v(mul_v(d_v(P, k), j), k - j), j)
                 for k in _keys(P) if k <= -2 for j in _inner_range(k)])


def Z1p(P):
    return add(*[scale(mul_v(d_v(P, k), k - 2 * j), k - j)
                 for k in _keys(P) if k >= 2 for j in _inner_range(k)])


def Z1m(P):
    return add(*[scale(mul_v(d_v(P, k), k - 2 * j), k - j)
                 for k in _keys(P) if k <= -2 for j in _inner_range(k)])


def K1p(P):
    return add(*[scale(M_u(d_v(d_u(P), k), -k + 1), k) for k in _keys(P)])


def K1m(P):
    return add(*[scale(M_u(d_v(d_u(P), k), k + 1), k) for k in _keys(P)])


def K2p(P):
    ks = _keys(P)
    return add(*[scale(mul_v(d_v(d_v(P, k), j), k - j), j * k) for j in ks for k in ks])


def K2m(P):
    ks = _keys(P)
    return add(*[scale(mul_v(d_v(d_v(P, k), j), k + j), j * k) for j in ks for k in ks])


def euler(P):
    """u d/du + sum_k k v_k d/dv_k, the derivative along A -> A e^{t}."""
    return add(M_u(d_u(P), 1), *[scale(mul_v(d_v(P, k), k), k) for k in _keys(P)])


def J(P):
    return euler(euler(P))


LITERAL = {"N0": N0, "N1": N1, "Y1p": Y1p, "Y1m": Y1m, "Y2p": Y2p, "Y2m": Y2m,
           "Z1p": Z1p, "Z1m": Z1m, "Z2p": Z2p, "Z2m": Z2m, "K1p": K1p, "K1m": K1m,
           "K2p": K2p, "K2m": K2m, "J": J, "Rplus": R_plus, "Rminus": R_minus}


def L0(P):
    N = add(N0(P), N1(P))
    Y1 = add(Y1p(P), Y1m(P), coeffs=[1, -1])
    Y2 = add(Y2p(P), Y2m(P), coeffs=[1, -1])
    return add(N, Y1, Y2, coeffs=[-1, -2, -2])


def L1_so(P):
    N = add(N0(P), N1(P))
    Z1 = add(Z1p(P), Z1m(P), coeffs=[1, -1])
    Z2 = add(Z2p(P), Z2m(P), coeffs=[1, -1])
    return add(N, Z1, Z2, coeffs=[1, 2, 2])


def L2_so(P):
    K1 = add(K1p(P), K1m(P), coeffs=[1, -1])
    K2 = add(K2p(P), K2m(P), coeffs=[1, -1])
    return add(K1, K2, coeffs=[2, 1])


def L2_su(P):
    return add(K1m(P), K2m(P), J(P), coeffs=[-2, -1, 1])


def DN(family, N, P):
    N = Fraction(N)
    if family == "so":
        return add(L0(P), L1_so(P), L2_so(P), coeffs=[1, 1 / N, 1 / N**2])
    if family == "sp":
        return add(L0(P), L1_so(P), L2_so(P), coeffs=[1, -1 / (2 * N), 1 / (4 * N**2)])
    if family == "su":
        return add(L0(P), L2_su(P), coeffs=[1, 1 / N**2])
    raise ValueError(family)


# brute-force basis enumeration

def enumerate_monomials(m: int) -> set:
    """Every (u, v) of trace degree <= m, by exhaustive search over exponent boxes."""
    keys = [k for k in range(-m, m + 1) if k]
    ranges = [range(m // abs(k) + 1) for k in keys]
    out = set()
    for u in range(-m, m + 1):
        for exps in itertools.product(*ranges):
            deg = abs(u) + sum(abs(k) * e for k, e in zip(keys, exps))
            if deg <= m:
                out.add((u, tuple(sorted((k, e) for k, e in zip(keys, exps) if e))))
    return out


# dense matrix evaluation

def ntr(A):
    return np.trace(A) / A.shape[0]


def eval_dense(P: dict, A: np.ndarray) -> np.ndarray:
    """Naive evaluation: u -> A, v_k -> normalized trace of A^k, using inverses directly."""
    d = A.shape[0]
    Ainv = np.linalg.inv(A)

    def power(n):
        B = np.eye(d, dtype=complex)
        for _ in range(abs(n)):
            B = B @ (A if n > 0 else Ainv)
        return B

    out = np.zeros((d, d), dtype=complex)
    for (u, v), c in P.items():
        s = complex(c)
        for k, e in v:
            s *= ntr(power(k)) ** e
        out += s * power(u)
    return out


def word_dense(word, A):
    """Normalized trace of the product of letters: 1 -> A, -1 -> A^-1, 2 -> A*, -2 -> (A*)^-1."""
    Ai = np.linalg.inv(A)
    table = {1: A, -1: Ai, 2: A.conj().T, -2: Ai.conj().T}
    M = np.eye(A.shape[0], dtype=complex)
    for x in word:
        M = M @ table[x]
    return ntr(M)


def random_so_complex(N, rng, scale=0.4):
    from scipy.linalg import expm
    X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    return expm(scale * (X - X.T))


def random_sp_complex(N, rng, scale=0.4):
    from scipy.linalg import expm
    # interleaved symplectic form diag(W, ..., W), W = [[0, 1], [-1, 0]]
    W = np.kron(np.eye(N), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    H = rng.standard_normal((2 * N, 2 * N)) + 1j * rng.standard_normal((2 * N, 2 * N))
    H = H + H.T
    return expm(scale * (W @ H))
