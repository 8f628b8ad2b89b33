"""Sparse arithmetic in the ring of trace polynomials C[u, u^-1; v_k].

A monomial is u^a * prod_k v_k^e_k with k ranging over the nonzero
integers.  Evaluated on a matrix A, u becomes A and v_k becomes the
normalized trace of A^k (trace divided by the matrix size).
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Callable, Iterable, Iterator, Mapping

import numpy as np

DEFAULT_DEGREE_CAP = 10


class DegreeCapError(ValueError):
    pass


class RationalComplex:
    """Exact complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def _coerce(cls, x):
        if isinstance(x, RationalComplex):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) + other
        return RationalComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return RationalComplex(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) * other
        return RationalComplex(self.re * o.re - self.im * o.im,
                               self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) / other
        d = o.re * o.re + o.im * o.im
        return self * RationalComplex(o.re / d, -o.im / d)

    def __rtruediv__(self, other):
        return RationalComplex(other) / self

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) == other
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self):
        return RationalComplex(self.re, -self.im)

    def __repr__(self):
        return f"RationalComplex({self.re}, {self.im})"


def _conj(c):
    return c.conjugate() if hasattr(c, "conjugate") else c


@dataclass(frozen=True, order=False)
class Monomial:
    """u^u_exp times prod v_k^e over the sorted (k, e) pairs in ``v``."""

    u: int = 0
    v: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        for k, e in self.v:
            if k == 0 or e <= 0:
                raise ValueError(f"invalid v factor v_{k}^{e}")

    @classmethod
    def make(cls, u: int = 0, v: Mapping[int, int] | None = None) -> Monomial:
        items = {}
        for k, e in (v or {}).items():
            if k == 0:
                raise ValueError("v_0 is not a variable")
            if e < 0:
                raise ValueError("v exponents must be nonnegative")
            if e:
                items[int(k)] = int(e)
        return cls(int(u), tuple(sorted(items.items())))

    @property
    def v_exps(self) -> dict[int, int]:
        return dict(self.v)

    @property
    def degree(self) -> int:
        return abs(self.u) + sum(abs(k) * e for k, e in self.v)

    def sort_key(self):
        return (self.degree, self.u, self.v)

    def __mul__(self, other: Monomial) -> Monomial:
        v = dict(self.v)
        for k, e in other.v:
            v[k] = v.get(k, 0) + e
        return Monomial(self.u + other.u, tuple(sorted(v.items())))

    def with_u(self, u: int) -> Monomial:
        return Monomial(u, self.v)

    def __str__(self):
        parts = []
        if self.u:
            parts.append("u" if self.u == 1 else f"u^{self.u}")
        for k, e in self.v:
            parts.append(f"v{k}" if e == 1 else f"v{k}^{e}")
        return "*".join(parts) if parts else "1"


ONE = Monomial()


def v_monomial(k: int, e: int = 1) -> Monomial:
    """v_k^e, with the convention v_0 = 1."""
    if k == 0 or e == 0:
        return ONE
    return Monomial(0, ((k, e),))


class TracePolynomial:
    """Immutable sparse element of C[u, u^-1; v]."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Monomial, Number] | Iterable = ()):
        acc: dict[Monomial, Number] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for mono, c in items:
            if mono in acc:
                acc[mono] = acc[mono] + c
            else:
                acc[mono] = c
        self._terms = {m: c for m, c in acc.items() if c != 0}

    # construction helpers
    @classmethod
    def constant(cls, c) -> TracePolynomial:
        return cls({ONE: c})

    @classmethod
    def u(cls, a: int = 1) -> TracePolynomial:
        return cls({Monomial(a): 1})

    @classmethod
    def v(cls, k: int, e: int = 1) -> TracePolynomial:
        return cls({v_monomial(k, e): 1})

    @classmethod
    def monomial(cls, mono: Monomial, c=1) -> TracePolynomial:
        return cls({mono: c})

    @property
    def terms(self) -> dict[Monomial, Number]:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items(), key=lambda mc: mc[0].sort_key())

    def __iter__(self) -> Iterator[Monomial]:
        return iter(sorted(self._terms, key=Monomial.sort_key))

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def coeff(self, mono: Monomial):
        return self._terms.get(mono, 0)

    @property
    def degree(self) -> int:
        return max((m.degree for m in self._terms), default=0)

    def is_laurent(self) -> bool:
        return all(not m.v for m in self._terms)

    def is_v_only(self) -> bool:
        return all(m.u == 0 for m in self._terms)

    # ring structure
    @staticmethod
    def _lift(other) -> TracePolynomial:
        if isinstance(other, TracePolynomial):
            return other
        return TracePolynomial.constant(other)

    def __add__(self, other):
        other = self._lift(other)
        return TracePolynomial(list(self._terms.items()) + list(other._terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return TracePolynomial({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, TracePolynomial):
            return self.scale(other)
        out: dict[Monomial, Number] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = m1 * m2
                out[m] = out.get(m, 0) + c1 * c2
        return TracePolynomial(out)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, c):
        return TracePolynomial({m: a / c for m, a in self._terms.items()})

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are only defined for u")
        out = TracePolynomial.constant(1)
        for _ in range(n):
            out = out * self
        return out

    def scale(self, c) -> TracePolynomial:
        return TracePolynomial({m: a * c for m, a in self._terms.items()})

    def map_coeffs(self, f: Callable) -> TracePolynomial:
        return TracePolynomial({m: f(c) for m, c in self._terms.items()})

    def conjugate_coeffs(self) -> TracePolynomial:
        return self.map_coeffs(_conj)

    def __eq__(self, other):
        if not isinstance(other, TracePolynomial):
            if isinstance(other, Number):
                other = TracePolynomial.constant(other)
            else:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def allclose(self, other, atol: float = 1e-12) -> bool:
        return self.max_abs_diff(other) <= atol

    def max_abs_diff(self, other) -> float:
        other = self._lift(other)
        keys = set(self._terms) | set(other._terms)
        return max((abs(complex(self.coeff(m)) - complex(other.coeff(m))) for m in keys),
                   default=0.0)

    def chop(self, tol: float = 1e-14) -> TracePolynomial:
        return TracePolynomial({m: c for m, c in self._terms.items() if abs(complex(c)) > tol})

    # evaluation
    def eval_scalar(self, u_val, v_vals: Mapping[int, Number] | Callable[[int], Number]):
        get = v_vals if callable(v_vals) else v_vals.__getitem__
        total = 0
        for m, c in self._terms.items():
            term = c * u_val ** m.u if m.u else c
            for k, e in m.v:
                try:
                    val = get(k)
                except KeyError:
                    raise KeyError(f"no value supplied for v{k}") from None
                term = term * val ** e
            total = total + term
        return total

    def at_ones(self):
        """Value at u = 1 and every v_k = 1, i.e. the sum of coefficients."""
        return sum(self._terms.values(), 0)

    def evaluate(self, A, spec=None) -> np.ndarray:
        """Matrix value with u -> A and v_k -> Tr(A^k) / dim(A)."""
        A = np.asarray(A, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {A.shape}")
        d = A.shape[0]
        if spec is not None and d != spec.matrix_dim:
            raise ValueError(f"{spec} acts on {spec.matrix_dim}x{spec.matrix_dim} matrices, got {d}")
        powers = MatrixPowers(A)
        out = np.zeros((d, d), dtype=complex)
        for m, c in self._terms.items():
            scalar = complex(c)
            for k, e in m.v:
                scalar *= powers.trace(k) ** e
            out += scalar * powers[m.u]
        return out

    # serialization
    def to_dict(self) -> dict:
        terms = []
        for m, c in self.items():
            z = complex(c)
            terms.append({"u": m.u, "v": {str(k): e for k, e in m.v},
                          "re": z.real, "im": z.imag})
        return {"terms": terms}

    @classmethod
    def from_dict(cls, data: Mapping) -> TracePolynomial:
        out = []
        for t in data["terms"]:
            mono = Monomial.make(t.get("u", 0), {int(k): e for k, e in t.get("v", {}).items()})
            out.append((mono, complex(t.get("re", 0.0), t.get("im", 0.0))))
        return cls(out)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> TracePolynomial:
        return cls.from_dict(json.loads(text))

    def format(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for m, c in self.items():
            coeff = _format_coeff(c)
            parts.append(coeff if m == ONE else f"{coeff}*{m}")
        return " + ".join(parts)

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"TracePolynomial({self.format()!r})"


def _format_coeff(c) -> str:
    if isinstance(c, (int, Fraction)):
        return f"({c})"
    if isinstance(c, RationalComplex):
        return f"({c.re}+({c.im})*i)"
    z = complex(c)
    return f"({z.real!r}+({z.imag!r})*i)"


class MatrixPowers:
    """Lazily computed integer powers of a square matrix and their traces."""

    def __init__(self, A: np.ndarray):
        self.A = A
        self.d = A.shape[0]
        self._pos = [np.eye(self.d, dtype=complex), A]
        self._neg = None
        self._traces: dict[int, complex] = {}

    def _inverse(self):
        if self._neg is None:
            if np.linalg.cond(self.A) > 1e14:
                raise np.linalg.LinAlgError("matrix is singular to working precision")
            self._neg = [self._pos[0], np.linalg.inv(self.A)]
        return self._neg

    def __getitem__(self, n: int) -> np.ndarray:
        seq = self._pos if n >= 0 else self._inverse()
        n = abs(n)
        while len(seq) <= n:
            seq.append(seq[-1] @ seq[1])
        return seq[n]

    def trace(self, k: int) -> complex:
        if k not in self._traces:
            self._traces[k] = np.trace(self[k]) / self.d
        return self._traces[k]


# basis enumeration

def _v_parts(budget: int, max_key: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """All v-monomials of weight <= budget using |keys| <= max_key."""
    if max_key == 0 or budget == 0:
        yield ()
        return
    for rest in _v_parts(budget, max_key - 1):
        used = sum(abs(k) * e for k, e in rest)
        left = budget - used
        for e_pos in range(left // max_key + 1):
            for e_neg in range((left - e_pos * max_key) // max_key + 1):
                extra = []
                if e_neg:
                    extra.append((-max_key, e_neg))
                if e_pos:
                    extra.append((max_key, e_pos))
                yield tuple(sorted(rest + tuple(extra)))


def basis_monomials(m: int, cap: int = DEFAULT_DEGREE_CAP) -> list[Monomial]:
    """All monomials of trace degree <= m in the canonical graded order."""
    if m < 0:
        raise ValueError("degree must be nonnegative")
    if m > cap:
        raise DegreeCapError(f"degree {m} exceeds the cap {cap}")
    out = []
    for a in range(-m, m + 1):
        budget = m - abs(a)
        for v in _v_parts(budget, budget):
            out.append(Monomial(a, v))
    out.sort(key=Monomial.sort_key)
    return out


# text parser

_TOKEN = re.compile(r"""
    \s*(?:
      (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)(?P<imag>[ij](?![A-Za-z0-9]))?
    | (?P<u>u)
    | (?P<v>v)(?P<vk>-?\d+)
    | (?P<i>[ij])(?![A-Za-z0-9])
    | (?P<op>[-+*^/()])
    )""", re.VERBOSE)


class ParseError(ValueError):
    pass


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt or mt.end() == pos:
            raise ParseError(f"unexpected input at {text[pos:pos + 10]!r}")
        pos = mt.end()
        if mt.group("num"):
            val = mt.group("num")
            kind = "imag" if mt.group("imag") else "num"
            out.append((kind, val))
        elif mt.group("u"):
            out.append(("u", "u"))
        elif mt.group("v"):
            out.append(("v", mt.group("vk")))
        elif mt.group("i"):
            out.append(("imag", "1"))
        else:
            out.append(("op", mt.group("op")))
    return out


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, op):
        tok = self.take()
        if tok != ("op", op):
            raise ParseError(f"expected {op!r}, got {tok[1]!r}")

    def expr(self) -> TracePolynomial:
        sign = 1
        if self.peek() in (("op", "+"), ("op", "-")):
            sign = -1 if self.take()[1] == "-" else 1
        out = self.term().scale(sign)
        while self.peek() in (("op", "+"), ("op", "-")):
            sign = -1 if self.take()[1] == "-" else 1
            out = out + self.term().scale(sign)
        return out

    def term(self) -> TracePolynomial:
        out = self.factor()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.factor()
            if op == "*":
                out = out * rhs
            else:
                if len(rhs) != 1 or ONE not in rhs.terms:
                    raise ParseError("division only by constants")
                divisor = rhs.coeff(ONE)
                if isinstance(divisor, int):
                    divisor = Fraction(divisor)
                out = out / divisor
        return out

    def integer(self) -> int:
        sign = 1
        if self.peek() == ("op", "-"):
            self.take()
            sign = -1
        kind, val = self.take()
        if kind == "v":
            raise ParseError("malformed exponent")
        if kind != "num" or not val.isdigit():
            raise ParseError(f"expected an integer exponent, got {val!r}")
        return sign * int(val)

    def factor(self) -> TracePolynomial:
        kind, val = self.take()
        if kind == "num":
            base = TracePolynomial.constant(int(val) if val.isdigit() else float(val))
        elif kind == "imag":
            base = TracePolynomial.constant(complex(0, float(val)))
        elif kind == "u":
            if self.peek() == ("op", "^"):
                self.take()
                return TracePolynomial.u(self.integer())
            return TracePolynomial.u(1)
        elif kind == "v":
            k = int(val)
            base = TracePolynomial.v(k) if k else TracePolynomial.constant(1)
        elif (kind, val) == ("op", "("):
            base = self.expr()
            self.expect(")")
        elif (kind, val) == ("op", "-"):
            return -self.factor()
        else:
            raise ParseError(f"unexpected token {val!r}")
        if self.peek() == ("op", "^"):
            self.take()
            n = self.integer()
            if n < 0:
                raise ParseError("negative exponents are only allowed on u")
            base = base ** n
        return base


def parse_poly(text: str) -> TracePolynomial:
    """Parse expressions such as ``u^2 - 3*v1*v-2*u^-1``."""
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty expression")
    p = _Parser(tokens)
    out = p.expr()
    if p.i != len(tokens):
        raise ParseError(f"trailing input near {tokens[p.i][1]!r}")
    return out


def load_poly(text: str) -> TracePolynomial:
    """Accept either the JSON format or the text syntax."""
    stripped = text.strip()
    if stripped.startswith("{"):
        return TracePolynomial.from_json(stripped)
    return parse_poly(stripped)


class DiskError(ValueError):
    pass


@dataclass(frozen=True)
class TransformParams:
    """Heat time s > 0 and complex time tau = t + i*theta.

    Transforms require tau inside the open disk of radius s centred at s.
    """

    s: float
    tau: complex

    def __post_init__(self):
        if not self.s > 0:
            raise DiskError(f"s must be positive, got {self.s}")

    @property
    def t(self) -> float:
        return complex(self.tau).real

    @property
    def theta(self) -> float:
        return complex(self.tau).imag

    def in_disk(self) -> bool:
        return (self.t - self.s) ** 2 + self.theta ** 2 < self.s ** 2

    def check(self) -> TransformParams:
        if not self.in_disk():
            raise DiskError(f"tau={complex(self.tau)} lies outside the disk |tau - s| < s for s={self.s}")
        return self


def parse_complex(text: str) -> complex:
    """Parse ``a+bi`` style flags (also accepts j and bare reals)."""
    cleaned = text.strip().replace(" ", "").replace("i", "j")
    if not cleaned:
        raise ValueError("empty complex number")
    try:
        return complex(cleaned)
    except ValueError:
        raise ValueError(f"cannot parse complex number {text!r}") from None
