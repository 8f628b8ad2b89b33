"""Word polynomials and the complex-time heat generator on SO(N, C) and Sp(N, C).

A word is a tuple of letters drawn from

    1  -> A         -1 -> A^-1
    2  -> A^*       -2 -> (A^*)^-1

and the variable v_w stands for the normalized trace of the product of
the letters.  Polynomials in these variables carry the generator of the
complex-time heat semigroup exactly, split by powers of 1/N.
"""
from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from math import comb
from numbers import Number
from typing import Iterable, Mapping

import numpy as np

from .linalg import NumericalOverflowError, SparseMatrix, expm_action
from .tracepoly import DegreeCapError, TracePolynomial, TransformParams

Word = tuple[int, ...]
WordMonomial = tuple[tuple[Word, int], ...]

LETTERS = (1, -1, 2, -2)
LETTER_NAMES = {1: "+1", -1: "-1", 2: "+*", -2: "-*"}
WORD_DEGREE_CAP = 8
CLOSURE_LIMIT = 20000

# (1, 1/N, 1/N^2) coefficients of: sum X^2 = c1 I; sum X A X = kappa A^-1 - tr(A) I
# on the group; sum tr(XC) tr(XD) = mu (tr(C^-1 D) - tr(CD))
FAMILY_CONSTANTS = {
    "so": {"c1": (-1.0, 1.0, 0.0), "kappa": (0.0, 1.0, 0.0), "mu": (0.0, 0.0, 1.0)},
    "sp": {"c1": (-1.0, -0.5, 0.0), "kappa": (0.0, -0.5, 0.0), "mu": (0.0, 0.0, 0.25)},
}


def epsilon(j: int, k: int) -> Word:
    """|j| copies of sign(j)*1 followed by |k| copies of sign(k)*star."""
    return (1 if j > 0 else -1,) * abs(j) + (2 if k > 0 else -2,) * abs(k)


def invert_word(w: Word) -> Word:
    return tuple(-x for x in reversed(w))


def word_key(w: Word):
    return (len(w), w)


def _monomial(factors: Mapping[Word, int]) -> WordMonomial:
    return tuple(sorted(((w, e) for w, e in factors.items() if w and e),
                        key=lambda we: word_key(we[0])))


def mono_degree(m: WordMonomial) -> int:
    return sum(len(w) * e for w, e in m)


def mono_mul(*ms: WordMonomial) -> WordMonomial:
    acc: dict[Word, int] = {}
    for m in ms:
        for w, e in m:
            acc[w] = acc.get(w, 0) + e
    return _monomial(acc)


def word_var(w: Word) -> WordMonomial:
    return ((w, 1),) if w else ()


def mono_sort_key(m: WordMonomial):
    return (mono_degree(m), tuple((word_key(w), e) for w, e in m))


def format_word(w: Word) -> str:
    return "(" + ",".join(LETTER_NAMES[x] for x in w) + ")"


class WordPolynomial:
    """Immutable sparse polynomial in the word variables v_w."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[WordMonomial, Number] | Iterable = ()):
        acc: dict[WordMonomial, Number] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for m, c in items:
            acc[m] = acc.get(m, 0) + c
        self._terms = {m: c for m, c in acc.items() if c != 0}

    @classmethod
    def constant(cls, c) -> WordPolynomial:
        return cls({(): c})

    @classmethod
    def var(cls, w: Word, e: int = 1) -> WordPolynomial:
        return cls({_monomial({tuple(w): e}): 1})

    @property
    def terms(self) -> dict[WordMonomial, Number]:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items(), key=lambda mc: mono_sort_key(mc[0]))

    def __len__(self):
        return len(self._terms)

    def coeff(self, m: WordMonomial):
        return self._terms.get(m, 0)

    @property
    def degree(self) -> int:
        return max((mono_degree(m) for m in self._terms), default=0)

    def __add__(self, other):
        if not isinstance(other, WordPolynomial):
            other = WordPolynomial.constant(other)
        return WordPolynomial(list(self._terms.items()) + list(other._terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> WordPolynomial:
        return WordPolynomial({m: a * c for m, a in self._terms.items()})

    def __mul__(self, other):
        if not isinstance(other, WordPolynomial):
            return self.scale(other)
        out: dict[WordMonomial, Number] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return WordPolynomial(out)

    __rmul__ = scale

    def __eq__(self, other):
        if not isinstance(other, WordPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def max_abs_diff(self, other: WordPolynomial) -> float:
        keys = set(self._terms) | set(other._terms)
        return max((abs(complex(self.coeff(m)) - complex(other.coeff(m))) for m in keys),
                   default=0.0)

    def at_ones(self):
        """Value with every v_w = 1 (A = identity)."""
        return sum(self._terms.values(), 0)

    def evaluate(self, A: np.ndarray, spec=None) -> complex:
        cache: dict[Word, complex] = {}
        letters = _LetterMatrices(np.asarray(A, dtype=complex), spec)
        total = 0j
        for m, c in self._terms.items():
            term = complex(c)
            for w, e in m:
                if w not in cache:
                    cache[w] = letters.trace(w)
                term *= cache[w] ** e
            total += term
        return total

    def reduced(self) -> WordPolynomial:
        """Rewrite each word in a cyclically and freely reduced canonical form.

        Evaluation is unchanged; the algebra itself never identifies words.
        """
        return WordPolynomial((reduce_monomial(m), c) for m, c in self._terms.items())

    def format(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for m, c in self.items():
            factors = "*".join(f"v{format_word(w)}" + (f"^{e}" if e > 1 else "") for w, e in m)
            parts.append(f"({complex(c)})" + (f"*{factors}" if factors else ""))
        return " + ".join(parts)

    def __repr__(self):
        return f"WordPolynomial({self.format()!r})"


def reduce_monomial(m: WordMonomial) -> WordMonomial:
    return mono_mul(*(word_var(canonical_word(w)) for w, e in m for _ in range(e)))


def canonical_word(w: Word) -> Word:
    """Free and cyclic reduction followed by the least rotation."""
    stack: list[int] = []
    for x in w:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    while len(stack) >= 2 and stack[0] == -stack[-1]:
        stack = stack[1:-1]
    if not stack:
        return ()
    return min(tuple(stack[i:] + stack[:i]) for i in range(len(stack)))


class _LetterMatrices:
    def __init__(self, A: np.ndarray, spec=None):
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {A.shape}")
        if spec is not None and A.shape[0] != spec.matrix_dim:
            raise ValueError(f"{spec} acts on {spec.matrix_dim}x{spec.matrix_dim} matrices")
        if np.linalg.cond(A) > 1e14:
            raise np.linalg.LinAlgError("matrix is singular to working precision")
        inv = np.linalg.inv(A)
        self.mats = {1: A, -1: inv, 2: A.conj().T, -2: inv.conj().T}
        self.d = A.shape[0]

    def product(self, w: Word) -> np.ndarray:
        out = np.eye(self.d, dtype=complex)
        for x in w:
            out = out @ self.mats[x]
        return out

    def trace(self, w: Word) -> complex:
        return complex(np.trace(self.product(w))) / self.d


def eval_word(w: Word, A: np.ndarray, spec=None) -> complex:
    """Normalized trace of the letter product (tr on SO, w-tr on Sp)."""
    if not w:
        return 1.0 + 0j
    return _LetterMatrices(np.asarray(A, dtype=complex), spec).trace(tuple(w))


def iota(Q: TracePolynomial) -> WordPolynomial:
    """v_k -> v_{eps(k,0)}; linear."""
    return _embed(Q, star=False)


def iota_star(Q: TracePolynomial) -> WordPolynomial:
    """v_k -> v_{eps(0,k)}; conjugate linear."""
    return _embed(Q, star=True)


def _embed(Q: TracePolynomial, star: bool) -> WordPolynomial:
    if not Q.is_v_only():
        raise ValueError("the word embedding is defined on polynomials without u")
    out = []
    for mono, c in Q.terms.items():
        factors = {(epsilon(0, k) if star else epsilon(k, 0)): e for k, e in mono.v}
        out.append((_monomial(factors), c.conjugate() if star else c))
    return WordPolynomial(out)


def bform(P: TracePolynomial, Q: TracePolynomial) -> WordPolynomial:
    """Word polynomial whose evaluation is tr(P(A) Q(A)^*); conjugate linear in Q."""
    out: dict[WordMonomial, Number] = {}
    for mp, cp in P.terms.items():
        left = {epsilon(k, 0): e for k, e in mp.v}
        for mq, cq in Q.terms.items():
            right = {epsilon(0, k): e for k, e in mq.v}
            m = mono_mul(_monomial(left), _monomial(right), word_var(epsilon(mp.u, mq.u)))
            out[m] = out.get(m, 0) + cp * np.conj(cq)
    return WordPolynomial(out)


# the generator

def _letter_info(x: int, p: int) -> tuple[bool, int, int]:
    """(holomorphic?, sign, slot) for the letter x at position p."""
    if x == 1:
        return True, 1, p + 1
    if x == -1:
        return True, -1, p
    if x == 2:
        return False, -1, p
    return False, 1, p + 1


Image = dict  # WordMonomial -> np.ndarray of shape (3,)


def _accumulate(acc: Image, m: WordMonomial, vec) -> None:
    if m in acc:
        acc[m] = acc[m] + vec
    else:
        acc[m] = np.array(vec, dtype=complex)


class HeatGenerator:
    """(1/2) A_{s,tau} acting on word monomials, as (G0, G1, G2) coefficient vectors."""

    def __init__(self, family: str, s: float, tau: complex, reduce: bool = False):
        if family not in FAMILY_CONSTANTS:
            raise ValueError(f"word generator is available for so and sp, not {family!r}")
        self.family = family
        self.s = float(s)
        self.tau = complex(tau)
        self.reduce = reduce
        const = FAMILY_CONSTANTS[family]
        self.c1 = np.array(const["c1"])
        self.kappa = np.array(const["kappa"])
        self.mu = np.array(const["mu"])
        # weights of d_z^2, d_zbar^2 and the mixed derivative (halved)
        self.w_holo = self.s - self.tau
        self.w_anti = self.s - self.tau.conjugate()
        self.w_mixed = self.s
        self._self_cache: dict[Word, Image] = {}
        self._grad_cache: dict[Word, tuple[list, list]] = {}
        self._gamma_cache: dict[tuple[Word, Word], Image] = {}
        self._image_cache: dict[WordMonomial, Image] = {}
        self._lock = threading.Lock()

    def _pair_weight(self, holo_p: bool, holo_q: bool) -> complex:
        if holo_p and holo_q:
            return self.w_holo
        if not holo_p and not holo_q:
            return self.w_anti
        return self.w_mixed

    def self_image(self, w: Word) -> Image:
        """(1/2) A_{s,tau} of a single trace v_w."""
        cached = self._self_cache.get(w)
        if cached is not None:
            return cached
        acc: Image = {}
        info = [_letter_info(x, p) for p, x in enumerate(w)]
        var = word_var(w)
        for holo, _, _ in info:
            weight = (self.w_holo if holo else self.w_anti) / 2
            _accumulate(acc, var, weight * self.c1)
        for p in range(len(w)):
            for q in range(p + 1, len(w)):
                hp, sp, a = info[p]
                hq, sq, b = info[q]
                weight = sp * sq * self._pair_weight(hp, hq)
                w0, w1, w2 = w[:a], w[a:b], w[b:]
                _accumulate(acc, word_var(w0 + invert_word(w1) + w2), weight * self.kappa)
                _accumulate(acc, mono_mul(word_var(w1), word_var(w0 + w2)),
                            -weight * np.array([1.0, 0.0, 0.0]))
        self._self_cache[w] = acc
        return acc

    def gradients(self, w: Word) -> tuple[list, list]:
        """d/dz and d/dzbar of v_w as lists of (sign, C) meaning sum sign * tr(X C)."""
        cached = self._grad_cache.get(w)
        if cached is not None:
            return cached
        holo, anti = [], []
        for p, x in enumerate(w):
            is_holo, sign, a = _letter_info(x, p)
            (holo if is_holo else anti).append((sign, w[a:] + w[:a]))
        self._grad_cache[w] = (holo, anti)
        return holo, anti

    def gamma(self, w1: Word, w2: Word) -> Image:
        """Carre du champ term coupling two traces."""
        key = (w1, w2) if word_key(w1) <= word_key(w2) else (w2, w1)
        cached = self._gamma_cache.get(key)
        if cached is not None:
            return cached
        h1, a1 = self.gradients(w1)
        h2, a2 = self.gradients(w2)
        acc: Image = {}
        blocks = ((h1, h2, self.w_holo), (a1, a2, self.w_anti),
                  (h1, a2, self.w_mixed), (a1, h2, self.w_mixed))
        for left, right, weight in blocks:
            for s1, C in left:
                for s2, D in right:
                    c = s1 * s2 * weight * self.mu
                    _accumulate(acc, word_var(invert_word(C) + D), c)
                    _accumulate(acc, word_var(C + D), -c)
        self._gamma_cache[key] = acc
        return acc

    def image(self, m: WordMonomial) -> Image:
        cached = self._image_cache.get(m)
        if cached is not None:
            return cached
        acc: Image = {}
        factors = dict(m)
        words = list(factors)
        for i, wi in enumerate(words):
            ei = factors[wi]
            rest_i = dict(factors)
            rest_i[wi] -= 1
            base = _monomial(rest_i)
            for img, vec in self.self_image(wi).items():
                _accumulate(acc, mono_mul(base, img), ei * vec)
            if ei >= 2:
                rest_ii = dict(factors)
                rest_ii[wi] -= 2
                base = _monomial(rest_ii)
                for img, vec in self.gamma(wi, wi).items():
                    _accumulate(acc, mono_mul(base, img), comb(ei, 2) * vec)
            for wj in words[i + 1:]:
                ej = factors[wj]
                rest_ij = dict(factors)
                rest_ij[wi] -= 1
                rest_ij[wj] -= 1
                base = _monomial(rest_ij)
                for img, vec in self.gamma(wi, wj).items():
                    _accumulate(acc, mono_mul(base, img), ei * ej * vec)
        if self.reduce:
            merged: Image = {}
            for k, v in acc.items():
                _accumulate(merged, reduce_monomial(k), v)
            acc = merged
        acc = {k: v for k, v in acc.items() if np.any(v != 0)}
        with self._lock:
            self._image_cache[m] = acc
        return acc

    def apply(self, W: WordPolynomial, N: int) -> WordPolynomial:
        """Generator at size N applied to a word polynomial."""
        powers = np.array([1.0, 1.0 / N, 1.0 / N**2])
        out = []
        for m, c in W.terms.items():
            for img, vec in self.image(m).items():
                out.append((img, complex(c) * complex(vec @ powers)))
        return WordPolynomial(out)


@dataclass
class GeneratorDecomposition:
    """(G0, G1, G2) over a basis of word monomials closed under the generator.

    Stored sparsely; the dense matrices are built on first access.
    """

    family: str
    params: TransformParams
    basis: list[WordMonomial]
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray  # (nnz, 3): coefficients of 1, 1/N, 1/N^2
    reduced: bool = False
    index: dict[WordMonomial, int] = field(repr=False, default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {m: i for i, m in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def degree(self) -> int:
        return max((mono_degree(m) for m in self.basis), default=0)

    def _dense(self, j: int) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        np.add.at(out, (self.rows, self.cols), self.vals[:, j])
        return out

    @cached_property
    def G0(self) -> np.ndarray:
        return self._dense(0)

    @cached_property
    def G1(self) -> np.ndarray:
        return self._dense(1)

    @cached_property
    def G2(self) -> np.ndarray:
        return self._dense(2)

    def matrix(self, N: int) -> np.ndarray:
        return self.G0 + self.G1 / N + self.G2 / N**2

    def operator(self, N: int | None, scale: complex = 1.0) -> SparseMatrix:
        """scale * (G0 + G1/N + G2/N^2); N=None keeps only G0."""
        powers = np.array([1.0, 0.0, 0.0]) if N is None else np.array([1.0, 1.0 / N, 1.0 / N**2])
        return SparseMatrix(self.dim, self.rows, self.cols, scale * (self.vals @ powers))

    def coords(self, W: WordPolynomial) -> np.ndarray:
        if self.reduced:
            W = W.reduced()
        x = np.zeros(self.dim, dtype=complex)
        for m, c in W.terms.items():
            if m not in self.index:
                raise KeyError(f"monomial {m} is outside this decomposition")
            x[self.index[m]] = complex(c)
        return x

    def from_coords(self, x: np.ndarray) -> WordPolynomial:
        return WordPolynomial(zip(self.basis, (complex(c) for c in x)))

    def apply(self, W: WordPolynomial, N: int | None) -> WordPolynomial:
        return self.from_coords(self.operator(N).matvec(self.coords(W)))

    def exp_apply(self, W: WordPolynomial, N: int | None, scale: complex = 1.0) -> WordPolynomial:
        """exp(scale * generator) W."""
        return self.from_coords(expm_action(self.operator(N, scale), self.coords(W)))

    def expectation(self, W: WordPolynomial, N: int | None, scale: complex = 1.0) -> complex:
        """exp(scale * generator) W evaluated at the identity (every v_w = 1)."""
        val = expm_action(self.operator(N, scale), self.coords(W)).sum()
        if not np.isfinite(val):
            raise NumericalOverflowError("generator exponential overflowed")
        return complex(val)

    def degree_preserving(self) -> bool:
        degs = np.array([mono_degree(m) for m in self.basis], dtype=int)
        return bool(np.all(degs[self.rows] == degs[self.cols]))


_generators: dict[tuple, HeatGenerator] = {}
_gen_lock = threading.Lock()


def heat_generator(family: str, s: float, tau: complex, reduce: bool = False) -> HeatGenerator:
    key = (family, float(s), complex(tau), reduce)
    with _gen_lock:
        if key not in _generators:
            _generators[key] = HeatGenerator(family, s, tau, reduce)
        return _generators[key]


def word_monomials(m: int, cap: int = WORD_DEGREE_CAP) -> list[WordMonomial]:
    """Every word monomial of trace degree <= m."""
    if m > cap:
        raise DegreeCapError(f"word degree {m} exceeds the cap {cap}")
    words = [w for L in range(1, m + 1) for w in product(LETTERS, repeat=L)]
    words.sort(key=word_key)
    out: list[WordMonomial] = []

    def grow(start: int, budget: int, current: dict):
        out.append(_monomial(current))
        for i in range(start, len(words)):
            w = words[i]
            if len(w) > budget:
                break
            current[w] = current.get(w, 0) + 1
            grow(i, budget - len(w), current)
            current[w] -= 1
            if not current[w]:
                del current[w]

    grow(0, m, {})
    out.sort(key=mono_sort_key)
    return out


def closure(gen: HeatGenerator, seeds: Iterable[WordMonomial], limit: int = CLOSURE_LIMIT) -> list[WordMonomial]:
    """Smallest set containing ``seeds`` and closed under the generator."""
    seen = set()
    queue = deque()
    for m in seeds:
        if m not in seen:
            seen.add(m)
            queue.append(m)
    while queue:
        m = queue.popleft()
        for img in gen.image(m):
            if img not in seen:
                seen.add(img)
                if len(seen) > limit:
                    raise DegreeCapError(f"generator closure exceeds {limit} monomials")
                queue.append(img)
    return sorted(seen, key=mono_sort_key)


def _decompose(gen: HeatGenerator, basis: list[WordMonomial], params: TransformParams) -> GeneratorDecomposition:
    index = {m: i for i, m in enumerate(basis)}
    rows, cols, vals = [], [], []
    for j, m in enumerate(basis):
        for img, vec in gen.image(m).items():
            rows.append(index[img])
            cols.append(j)
            vals.append(vec)
    vals = np.array(vals, dtype=complex).reshape(-1, 3)
    return GeneratorDecomposition(gen.family, params, basis, np.array(rows, dtype=np.intp),
                                  np.array(cols, dtype=np.intp), vals, gen.reduce, index)


def build_generator(family: str, params: TransformParams, m: int | None = None,
                    seeds: Iterable[WordMonomial] | WordPolynomial | None = None,
                    cap: int = WORD_DEGREE_CAP, reduce: bool = False) -> GeneratorDecomposition:
    """Exact split of (1/2) A_{s,tau} into G0 + G1/N + G2/N^2.

    With ``seeds`` the basis is the closure of those monomials; otherwise it
    is every word monomial of degree <= m (feasible for small m only).
    ``reduce`` rewrites every image in reduced cyclic form; evaluations are
    unchanged and the basis is much smaller.
    """
    gen = heat_generator(family, params.s, params.tau, reduce)
    if seeds is not None:
        if isinstance(seeds, WordPolynomial):
            seeds = list(seeds.terms)
        seeds = [reduce_monomial(x) for x in seeds] if reduce else list(seeds)
        top = max((mono_degree(x) for x in seeds), default=0)
        if top > cap:
            raise DegreeCapError(f"word degree {top} exceeds the cap {cap}")
        basis = closure(gen, seeds)
    else:
        if m is None:
            raise ValueError("give either a degree or seed monomials")
        basis = word_monomials(m, cap)
        if reduce:
            basis = closure(gen, {reduce_monomial(x) for x in basis})
    return _decompose(gen, basis, params)


def l2_norm_sq(spec, params: TransformParams, P: TracePolynomial, measure: str = "mu",
               cap: int = WORD_DEGREE_CAP, reduce: bool = True) -> float:
    """Exact squared L^2 norm of the matrix-valued trace polynomial P_N.

    ``mu`` integrates tr(P P^*) against the complex-time heat kernel on the
    complexified group; ``rho`` uses the heat kernel at time s on the compact
    group (tau = 0).
    """
    if spec.family not in FAMILY_CONSTANTS:
        raise ValueError("exact L^2 norms are available for so and sp only")
    if measure == "mu":
        params.check()
        gen_params = params
    elif measure == "rho":
        gen_params = TransformParams(params.s, 0.0)
    else:
        raise ValueError(f"unknown measure {measure!r}")
    if 2 * P.degree > cap:
        raise DegreeCapError(f"degree {P.degree} exceeds half the word cap {cap}")
    if not P:
        return 0.0
    W = bform(P, P)
    dec = build_generator(spec.family, gen_params, seeds=W, cap=cap, reduce=reduce)
    value = dec.expectation(W, spec.N)
    if value.real < -1e-10 * max(1.0, abs(value)):
        raise ArithmeticError(f"negative squared norm {value}")
    return max(value.real, 0.0)


def heat_expectation(spec, params: TransformParams, W: WordPolynomial, N: int | None = None,
                     reduce: bool = True) -> complex:
    """Integral of the word polynomial against the complex-time heat kernel."""
    dec = build_generator(spec.family, params, seeds=W, reduce=reduce)
    return dec.expectation(W, spec.N if N is None else N)


__all__ = ["Word", "WordPolynomial", "epsilon", "invert_word", "eval_word", "iota", "iota_star",
           "bform", "HeatGenerator", "GeneratorDecomposition", "build_generator",
           "word_monomials", "closure", "heat_generator", "l2_norm_sq", "heat_expectation", "canonical_word",
           "reduce_monomial", "mono_degree", "word_var"]
