"""Differential operators on trace polynomials and their exponentials.

Each primitive operator is implemented as a rule acting on a single
monomial; named operators are integer or rational combinations of the
primitives.  Every operator can also be assembled into a dense matrix on
the space of polynomials of trace degree <= m, and exponentials are taken
there.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .linalg import NumericalOverflowError, expm
from .tracepoly import (DEFAULT_DEGREE_CAP, ONE, Monomial, TracePolynomial,
                        basis_monomials)

FAMILIES = ("so", "su", "u", "sp")


def _times_v(mono: Monomial, k: int, e: int = 1) -> Monomial:
    if k == 0:
        return mono
    v = dict(mono.v)
    v[k] = v.get(k, 0) + e
    return Monomial(mono.u, tuple(sorted(v.items())))


def _drop_v(mono: Monomial, k: int) -> tuple[int, Monomial]:
    """Partial derivative in v_k: returns (exponent, monomial / v_k)."""
    v = dict(mono.v)
    e = v.get(k, 0)
    if not e:
        return 0, mono
    if e == 1:
        del v[k]
    else:
        v[k] = e - 1
    return e, Monomial(mono.u, tuple(sorted(v.items())))


# primitive rules: monomial -> iterable of (coefficient, monomial)

def _n0(m):
    w = sum(abs(k) * e for k, e in m.v)
    if w:
        yield w, m


def _n1(m):
    if m.u:
        yield abs(m.u), m


def _y1p(m):
    a = m.u
    for k in range(1, a):
        yield a - k, _times_v(m.with_u(a - k), k)


def _y1m(m):
    a = m.u
    for k in range(a + 1, 0):
        yield a - k, _times_v(m.with_u(a - k), k)


def _y2p(m):
    for k, _ in m.v:
        if k >= 2:
            e, rest = _drop_v(m, k)
            for j in range(1, k):
                yield j * e, _times_v(_times_v(rest, j), k - j)


def _y2m(m):
    for k, _ in m.v:
        if k <= -2:
            e, rest = _drop_v(m, k)
            for j in range(k + 1, 0):
                yield j * e, _times_v(_times_v(rest, j), k - j)


def _z1p(m):
    for k, _ in m.v:
        if k >= 2:
            e, rest = _drop_v(m, k)
            for j in range(1, k):
                yield (k - j) * e, _times_v(rest, k - 2 * j)


def _z1m(m):
    for k, _ in m.v:
        if k <= -2:
            e, rest = _drop_v(m, k)
            for j in range(k + 1, 0):
                yield (k - j) * e, _times_v(rest, k - 2 * j)


def _z2p(m):
    a = m.u
    for k in range(1, a):
        yield a - k, m.with_u(a - 2 * k)


def _z2m(m):
    a = m.u
    for k in range(a + 1, 0):
        yield a - k, m.with_u(a - 2 * k)


def _k1(sign):
    def rule(m):
        a = m.u
        if not a:
            return
        for k, _ in m.v:
            e, rest = _drop_v(m, k)
            shift = -k if sign > 0 else k
            yield a * k * e, rest.with_u(a + shift)
    return rule


def _second_v(m) -> Iterator[tuple[int, int, int, Monomial]]:
    """Ordered pairs (j, k) with the coefficient of d^2/dv_j dv_k."""
    for j, _ in m.v:
        ej, rest = _drop_v(m, j)
        for k, _ in rest.v:
            ek, rest2 = _drop_v(rest, k)
            yield j, k, ej * ek, rest2


def _k2p(m):
    for j, k, c, rest in _second_v(m):
        yield j * k * c, _times_v(rest, k - j)


def _k2m(m):
    for j, k, c, rest in _second_v(m):
        yield j * k * c, _times_v(rest, k + j)


def _euler_squared(m):
    # (u d/du + sum_k k v_k d/dv_k)^2 acts diagonally on monomials
    w = m.u + sum(k * e for k, e in m.v)
    if w:
        yield w * w, m


def _rplus(m):
    if m.u >= 0:
        yield 1, m


def _rminus(m):
    if m.u < 0:
        yield 1, m


PRIMITIVES = {
    "N0": _n0, "N1": _n1,
    "Y1p": _y1p, "Y1m": _y1m, "Y2p": _y2p, "Y2m": _y2m,
    "Z1p": _z1p, "Z1m": _z1m, "Z2p": _z2p, "Z2m": _z2m,
    "K1p": _k1(+1), "K1m": _k1(-1), "K2p": _k2p, "K2m": _k2m,
    "J": _euler_squared, "Rplus": _rplus, "Rminus": _rminus,
}


def _combo(**coeffs) -> dict[str, Fraction]:
    return {k: Fraction(v) for k, v in coeffs.items()}


def _add(*parts: tuple[Fraction, dict]) -> dict[str, Fraction]:
    out: dict[str, Fraction] = {}
    for c, d in parts:
        for k, v in d.items():
            out[k] = out.get(k, 0) + Fraction(c) * v
    return {k: v for k, v in out.items() if v}


_N = _combo(N0=1, N1=1)
_Y1 = _combo(Y1p=1, Y1m=-1)
_Y2 = _combo(Y2p=1, Y2m=-1)
_Z1 = _combo(Z1p=1, Z1m=-1)
_Z2 = _combo(Z2p=1, Z2m=-1)
_K1 = _combo(K1p=1, K1m=-1)
_K2 = _combo(K2p=1, K2m=-1)

COMPOSITES = {
    "N": _N, "Y1": _Y1, "Y2": _Y2, "Z1": _Z1, "Z2": _Z2, "K1": _K1, "K2": _K2,
    "L0": _add((-1, _N), (-2, _Y1), (-2, _Y2)),
    "L1_so": _add((1, _N), (2, _Z1), (2, _Z2)),
    "L2_so": _add((2, _K1), (1, _K2)),
    "L1_su": {},
    "L2_su": _add((-2, _combo(K1m=1)), (-1, _combo(K2m=1)), (1, _combo(J=1))),
    "L1_u": {},
    "L2_u": _add((-2, _combo(K1m=1)), (-1, _combo(K2m=1))),
}
COMPOSITES["L1_sp"] = _add((Fraction(-1, 2), COMPOSITES["L1_so"]))
COMPOSITES["L2_sp"] = _add((Fraction(1, 4), COMPOSITES["L2_so"]))

TAGS = tuple(PRIMITIVES) + tuple(COMPOSITES) + ("DN",)


@dataclass(frozen=True)
class OperatorSpec:
    """A named operator; ``DN`` additionally needs a family and N.

    ``coeffs`` lets callers build arbitrary combinations such as
    a*L0 + b*L1_so (see :func:`combination`).
    """

    tag: str
    family: str | None = None
    N: int | None = None
    coeffs: tuple[tuple[str, complex], ...] = field(default=(), compare=True)

    def __post_init__(self):
        if self.tag == "combo":
            return
        if self.tag not in TAGS:
            raise ValueError(f"unknown operator tag {self.tag!r}")
        if self.tag == "DN":
            if self.family not in FAMILIES:
                raise ValueError(f"DN needs a family in {FAMILIES}")
            if not isinstance(self.N, int) or self.N < 1:
                raise ValueError("DN needs a positive integer N")

    def primitive_terms(self) -> dict[str, object]:
        if self.tag in PRIMITIVES:
            return {self.tag: 1}
        if self.tag in COMPOSITES:
            return dict(COMPOSITES[self.tag])
        if self.tag == "DN":
            inv = Fraction(1, self.N)
            return _add((1, COMPOSITES["L0"]),
                        (inv, COMPOSITES[f"L1_{self.family}"]),
                        (inv * inv, COMPOSITES[f"L2_{self.family}"]))
        out: dict[str, object] = {}
        for name, c in self.coeffs:
            for prim, w in OperatorSpec(name).primitive_terms().items():
                out[prim] = out.get(prim, 0) + c * w
        return {k: v for k, v in out.items() if v != 0}


def DN(family: str, N: int) -> OperatorSpec:
    return OperatorSpec("DN", family, N)


def combination(**coeffs) -> OperatorSpec:
    """Linear combination of named operators, e.g. combination(L0=a, L1_so=b)."""
    return OperatorSpec("combo", coeffs=tuple(sorted(coeffs.items())))


def _as_spec(op) -> OperatorSpec:
    return op if isinstance(op, OperatorSpec) else OperatorSpec(op)


def apply(op: OperatorSpec | str, P: TracePolynomial) -> TracePolynomial:
    """Rule-based action of an operator on a trace polynomial."""
    op = _as_spec(op)
    out: list = []
    for prim, w in op.primitive_terms().items():
        rule = PRIMITIVES[prim]
        for mono, c in P.terms.items():
            for n, image in rule(mono):
                out.append((image, w * n * c))
    return TracePolynomial(out)


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense matrix of an operator on polynomials of trace degree <= m."""

    degree: int
    basis: tuple[Monomial, ...]
    entries: np.ndarray

    @property
    def index(self) -> dict[Monomial, int]:
        return _basis_index(self.degree)

    def coords(self, P: TracePolynomial) -> np.ndarray:
        return to_coords(P, self.degree)

    def from_coords(self, x: np.ndarray) -> TracePolynomial:
        return from_coords(x, self.degree)


_index_cache: dict[int, dict[Monomial, int]] = {}


def _basis_index(m: int) -> dict[Monomial, int]:
    if m not in _index_cache:
        _index_cache[m] = {mono: i for i, mono in enumerate(basis_monomials(m, cap=max(m, DEFAULT_DEGREE_CAP)))}
    return _index_cache[m]


def to_coords(P: TracePolynomial, m: int) -> np.ndarray:
    index = _basis_index(m)
    x = np.zeros(len(index), dtype=complex)
    for mono, c in P.terms.items():
        if mono not in index:
            raise ValueError(f"{mono} has trace degree above {m}")
        x[index[mono]] = complex(c)
    return x


def from_coords(x: np.ndarray, m: int) -> TracePolynomial:
    basis = basis_monomials(m, cap=max(m, DEFAULT_DEGREE_CAP))
    return TracePolynomial((mono, complex(c)) for mono, c in zip(basis, x))


_primitive_cache: dict[tuple[str, int], np.ndarray] = {}
_matrix_cache: dict[tuple[OperatorSpec, int], OperatorMatrix] = {}
_cache_lock = threading.Lock()


def _primitive_matrix(prim: str, m: int) -> np.ndarray:
    key = (prim, m)
    mat = _primitive_cache.get(key)
    if mat is None:
        index = _basis_index(m)
        mat = np.zeros((len(index), len(index)))
        rule = PRIMITIVES[prim]
        for j, mono in enumerate(index):
            for n, image in rule(mono):
                mat[index[image], j] += n
        mat.setflags(write=False)
        with _cache_lock:
            _primitive_cache.setdefault(key, mat)
    return mat


def assemble(op: OperatorSpec | str, m: int, cap: int = DEFAULT_DEGREE_CAP) -> OperatorMatrix:
    """Matrix of ``op`` on the trace-degree <= m subspace; column j is the image of basis[j]."""
    op = _as_spec(op)
    if m > cap:
        from .tracepoly import DegreeCapError
        raise DegreeCapError(f"degree {m} exceeds the cap {cap}")
    key = (op, m)
    cached = _matrix_cache.get(key)
    if cached is not None:
        return cached
    terms = op.primitive_terms()
    complex_coeffs = any(isinstance(w, complex) for w in terms.values())
    n = len(_basis_index(m))
    entries = np.zeros((n, n), dtype=complex if complex_coeffs else float)
    for prim, w in terms.items():
        entries += (complex(w) if complex_coeffs else float(w)) * _primitive_matrix(prim, m)
    entries.setflags(write=False)
    result = OperatorMatrix(m, tuple(basis_monomials(m, cap=max(m, cap))), entries)
    with _cache_lock:
        return _matrix_cache.setdefault(key, result)


def exp_apply(op: OperatorSpec | str, scale: complex, P: TracePolynomial,
              cap: int = DEFAULT_DEGREE_CAP) -> TracePolynomial:
    """exp(scale * op) applied to P, computed on the degree <= deg P subspace."""
    m = P.degree
    if scale == 0:
        return P
    mat = assemble(op, m, cap=cap).entries
    x = expm(scale * mat) @ to_coords(P, m)
    if not np.all(np.isfinite(x)):
        raise NumericalOverflowError("operator exponential overflowed")
    return from_coords(x, m)


def boosted_sb(params, spec, P: TracePolynomial, inverse: bool = False) -> TracePolynomial:
    """Segal-Bargmann transform of P on the group ``spec`` at complex time params.tau.

    Forward: exp((tau/2) D_N) P.  Inverse: exp(-(tau/2) D_N) P.
    """
    params.check()
    tau = complex(params.tau)
    sign = -1 if inverse else 1
    return exp_apply(DN(spec.family, spec.N), sign * tau / 2, P)


def heat_moment(spec, s: float, k: int) -> complex:
    """Exact expectation of the normalized trace of A^k under the heat kernel at time s."""
    if k == 0:
        return 1.0
    return complex(exp_apply(DN(spec.family, spec.N), s / 2, TracePolynomial.v(k)).at_ones())


__all__ = ["OperatorSpec", "OperatorMatrix", "DN", "combination", "apply", "assemble",
           "exp_apply", "boosted_sb", "heat_moment", "to_coords", "from_coords", "ONE"]
