"""Numerical verification suites.

Each suite returns a list of :class:`Check` records; a check carries the
observed error, what it was compared against and the tolerance used.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .free import free_sb
from .groups import (MAGIC_KINDS, QUAT_UNITS, GroupSpec, Quaternion, QuaternionMatrix,
                     counterexample_sums, fd_generator, fd_laplacian, fd_vector_field, magic_closed_form,
                     magic_sum, ntrace, omega, phi_inverse, phi_map, psi_map, quaternion_inner,
                     quaternion_magic_closed_form, quaternion_magic_sum, quaternion_sp_basis,
                     random_group_element, random_quaternion_matrix, random_quaternion_unitary,
                     rotate_basis)
from .linalg import expm
from .operators import DN, apply, assemble, combination, exp_apply
from .tracepoly import RationalComplex, TracePolynomial, TransformParams, basis_monomials
from .words import WordPolynomial, build_generator, heat_generator, word_monomials

DEFAULT_N = {"so": (3, 4, 5), "su": (2, 3, 4), "u": (2, 3), "sp": (1, 2, 3)}
FAMILIES = ("so", "su", "u", "sp")


@dataclass
class Check:
    name: str
    passed: bool
    observed: float | str
    expected: float | str
    tolerance: float | None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["status"] = "pass" if self.passed else "fail"
        return out


def _err_check(name: str, err: float, tol: float, expected="0") -> Check:
    err = float(err)
    return Check(name, bool(err <= tol), err, expected, tol)


def random_poly(rng: np.random.Generator, degree: int, terms: int = 4, kind: str = "full",
                real: bool = False) -> TracePolynomial:
    """Random trace polynomial with at most ``terms`` monomials of degree <= ``degree``.

    kind: ``full`` (u and v), ``laurent`` (u only) or ``v`` (v only).
    """
    pool = basis_monomials(degree)
    if kind == "laurent":
        pool = [m for m in pool if not m.v]
    elif kind == "v":
        pool = [m for m in pool if m.u == 0]
    picks = rng.choice(len(pool), size=min(terms, len(pool)), replace=False)
    out = []
    for i in picks:
        c = rng.standard_normal() if real else complex(rng.standard_normal(), rng.standard_normal())
        out.append((pool[i], c))
    return TracePolynomial(out)


def _rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b))))


# magic formulas

def suite_magic(seed: int = 0, N_list: Sequence[int] | None = None, samples: int = 20) -> list[Check]:
    rng = np.random.default_rng(seed)
    N_list = tuple(N_list or (2, 3, 4, 5, 6))
    checks = []
    for fam in FAMILIES:
        for N in N_list:
            if fam in ("so", "su") and N < 2:
                continue
            spec = GroupSpec(fam, N)
            d = spec.matrix_dim
            rotated = rotate_basis(spec.basis, rng)
            errs = {k: 0.0 for k in MAGIC_KINDS}
            rot_errs = {k: 0.0 for k in MAGIC_KINDS}
            for _ in range(samples):
                A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
                B = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
                for kind in MAGIC_KINDS:
                    lit = magic_sum(spec, kind, A, B)
                    closed = magic_closed_form(spec, kind, A, B)
                    errs[kind] = max(errs[kind], _rel(lit, closed))
                    rot_errs[kind] = max(rot_errs[kind], _rel(magic_sum(spec, kind, A, B, rotated), lit))
            for kind in MAGIC_KINDS:
                checks.append(_err_check(f"magic {kind} {spec}", errs[kind], 1e-10))
                checks.append(_err_check(f"magic {kind} {spec} rotated basis", rot_errs[kind], 1e-10))
    for N in N_list:
        err = {k: 0.0 for k in MAGIC_KINDS}
        for _ in range(max(1, samples // 4)):
            A = random_quaternion_matrix(N, rng)
            B = random_quaternion_matrix(N, rng)
            for kind in MAGIC_KINDS:
                lit = quaternion_magic_sum(kind, N, A, B)
                closed = quaternion_magic_closed_form(kind, N, A, B)
                if isinstance(lit, QuaternionMatrix):
                    err[kind] = max(err[kind], _rel(lit.parts, closed.parts))
                else:
                    err[kind] = max(err[kind], abs(lit - closed))
        for kind in MAGIC_KINDS:
            checks.append(_err_check(f"quaternionic magic {kind} N={N}", err[kind], 1e-10))
    return checks


# counterexample

COUNTEREXAMPLE_LHS = ((Fraction(-3, 2), Fraction(0)), (Fraction(1, 2), Fraction(-3, 2)))
COUNTEREXAMPLE_RHS = ((Fraction(-3, 2), Fraction(-1, 2)), (Fraction(0), Fraction(-3, 2)))


def _as_fractions(M) -> tuple:
    rows = []
    for row in M:
        out = []
        for x in row:
            if x.im != 0:
                return ("non-real entry",)
            out.append(x.re)
        rows.append(tuple(out))
    return tuple(rows)


def suite_counterexample(seed: int = 0, N_list=None) -> list[Check]:
    lhs, rhs = counterexample_sums()
    lf, rf = _as_fractions(lhs), _as_fractions(rhs)
    fmt = lambda M: "[" + "; ".join(" ".join(str(x) for x in row) for row in M) + "]"
    return [
        Check("basis sum Y B Y over sp(1)", lf == COUNTEREXAMPLE_LHS, fmt(lf), fmt(COUNTEREXAMPLE_LHS), 0.0),
        Check("quaternionic closed form at B", rf == COUNTEREXAMPLE_RHS, fmt(rf), fmt(COUNTEREXAMPLE_RHS), 0.0),
        Check("the two sides differ", lf != rf, "differ" if lf != rf else "equal", "differ", None),
    ]


# intertwining of the Laplacian with D_N

def quaternion_eval(P: TracePolynomial, A: QuaternionMatrix) -> QuaternionMatrix:
    """P evaluated purely in quaternion arithmetic; coefficients must be real."""
    powers: dict[int, QuaternionMatrix] = {}

    def power(k):
        if k not in powers:
            powers[k] = A.power(k)
        return powers[k]

    out = QuaternionMatrix.zeros(A.N)
    for mono, c in P.terms.items():
        c = complex(c)
        if c.imag:
            raise ValueError("quaternion evaluation needs real coefficients")
        scalar = c.real
        for k, e in mono.v:
            scalar *= power(k).re_trace() ** e
        out = out + power(mono.u).scale(scalar)
    return out


def quaternion_exp(X: QuaternionMatrix) -> QuaternionMatrix:
    return phi_inverse(expm(phi_map(X)))


def quaternion_fd_laplacian(P: TracePolynomial, A: QuaternionMatrix, h: float = 1e-3) -> QuaternionMatrix:
    f0 = quaternion_eval(P, A)
    total = QuaternionMatrix.zeros(A.N)
    for X in quaternion_sp_basis(A.N):
        plus = quaternion_eval(P, A @ quaternion_exp(X.scale(h)))
        minus = quaternion_eval(P, A @ quaternion_exp(X.scale(-h)))
        total = total + (plus - f0.scale(2) + minus).scale(1 / h**2)
    return total


def suite_intertwine(seed: int = 0, N_list: Sequence[int] | None = None, polys: int = 10,
                     degree: int = 4, h: float = 1e-3) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []
    for fam in FAMILIES:
        Ns = [N for N in (N_list or DEFAULT_N[fam]) if not (fam in ("so", "su") and N < 2)]
        worst = 0.0
        for i in range(polys):
            spec = GroupSpec(fam, Ns[i % len(Ns)])
            P = random_poly(rng, degree)
            A = random_group_element(spec, rng, 0.5)
            fd = fd_laplacian(lambda B: P.evaluate(B, spec), A, spec, h)
            exact = apply(DN(fam, spec.N), P).evaluate(A, spec)
            worst = max(worst, _rel(fd, exact))
        checks.append(_err_check(f"Laplacian vs D_N on {fam} N in {Ns}", worst, 1e-4))
        spec = GroupSpec(fam, Ns[0])
        const = TracePolynomial.constant(2.5)
        A = random_group_element(spec, rng, 0.5)
        both = max(np.abs(fd_laplacian(lambda B: const.evaluate(B, spec), A, spec, h)).max(),
                   np.abs(apply(DN(fam, spec.N), const).evaluate(A, spec)).max())
        checks.append(_err_check(f"degree-0 polynomial on {spec}", both, 1e-12))
    Ns = [N for N in (N_list or (1, 2)) if N <= 3]
    worst = 0.0
    for i in range(max(3, polys // 3)):
        N = Ns[i % len(Ns)]
        P = random_poly(rng, min(degree, 3), real=True)
        A = random_quaternion_unitary(N, rng, 0.5)
        fd = phi_map(quaternion_fd_laplacian(P, A, h))
        exact = apply(DN("sp", N), P).evaluate(phi_map(A), GroupSpec("sp", N))
        worst = max(worst, _rel(fd, exact))
    checks.append(_err_check(f"quaternionic Laplacian vs D_N, N in {Ns}", worst, 1e-4))
    return checks


# derivative formulas on SO and Sp

def laplacian_power(spec: GroupSpec, A: np.ndarray, m: int, neg_sign: int = 1) -> np.ndarray:
    """Closed form of the Laplacian of A -> A^m on SO(N) or Sp(N).

    ``neg_sign=-1`` swaps the inner weight (-m+j) for (-m-j) when m < 0,
    which is kept only to show that variant fails.
    """
    N, fam = spec.N, spec.family
    P = lambda k: np.linalg.matrix_power(A, k)
    if m >= 0:
        js = range(1, m)
        weight = lambda j: m - j
    else:
        js = range(m + 1, 0)
        weight = lambda j: -m + neg_sign * j
    first = sum((weight(j) * P(m - 2 * j) for j in js), np.zeros_like(A))
    second = sum((weight(j) * ntrace(P(j)) * P(m - j) for j in js), np.zeros_like(A))
    if fam == "so":
        diag = -m * (N - 1) / N if m >= 0 else m * (N - 1) / N
        return 2 * (first / N - second) + diag * P(m)
    if fam == "sp":
        c = (-1 - 1 / (2 * N)) * m
        return -first / N - 2 * second + (c if m >= 0 else -c) * P(m)
    raise ValueError("closed forms are for so and sp")


def cross_sum_closed(spec: GroupSpec, A: np.ndarray, m: int, p: int) -> np.ndarray:
    N = spec.N
    c = m * p / N**2 if spec.family == "so" else m * p / (4 * N**2)
    P = lambda k: np.linalg.matrix_power(A, k)
    return c * (P(p - m) - P(p + m))


def suite_derivative(seed: int = 0, N_list: Sequence[int] | None = None, h: float = 1e-3) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []
    for fam in ("so", "sp"):
        for N in (N_list or DEFAULT_N[fam]):
            if fam == "so" and N < 2:
                continue
            spec = GroupSpec(fam, N)
            A = random_group_element(spec, rng, 0.5, complexified=True)
            worst, alt = 0.0, 0.0
            for m in range(-4, 5):
                fd = fd_laplacian(lambda B: np.linalg.matrix_power(B, m), A, spec, h)
                worst = max(worst, _rel(fd, laplacian_power(spec, A, m)))
                if m <= -2:
                    alt = max(alt, _rel(fd, laplacian_power(spec, A, m, neg_sign=-1)))
            checks.append(_err_check(f"Laplacian of A^m, |m| <= 4, on {spec}", worst, 1e-4))
            checks.append(Check(f"weight (-m-j) for m < 0 rejected on {spec}", alt > 1e-2, alt, "> 1e-2", 1e-2))
            worst = 0.0
            for m in (-2, -1, 1, 2):
                for X in spec.basis[:3]:
                    fd = fd_vector_field(lambda B: ntrace(np.linalg.matrix_power(B, m)), A, X, h)
                    worst = max(worst, _rel(fd, m * ntrace(X @ np.linalg.matrix_power(A, m))))
            checks.append(_err_check(f"derivative of tr(A^m) on {spec}", worst, 1e-5))
            worst = 0.0
            for m in (-2, -1, 1, 2):
                for p in (-2, -1, 1, 2):
                    total = sum(fd_vector_field(lambda B: ntrace(np.linalg.matrix_power(B, m)), A, X, h)
                                * fd_vector_field(lambda B: np.linalg.matrix_power(B, p), A, X, h)
                                for X in spec.basis)
                    worst = max(worst, _rel(total, cross_sum_closed(spec, A, m, p)))
            checks.append(_err_check(f"cross sum of first derivatives on {spec}", worst, 1e-5))
    return checks


# word generator

def random_word_monomials(rng: np.random.Generator, degree: int, count: int):
    pool = [m for m in word_monomials(degree) if m]
    return [pool[i] for i in rng.choice(len(pool), size=min(count, len(pool)), replace=False)]


def suite_word_generator(seed: int = 0, N_list: Sequence[int] | None = None, count: int = 12,
                         params: TransformParams | None = None, h: float = 1e-3) -> list[Check]:
    rng = np.random.default_rng(seed)
    params = params or TransformParams(1.0, 0.4 + 0.3j)
    checks = []
    cases = [("so", 3), ("sp", 2)] if not N_list else [(f, N) for f in ("so", "sp") for N in N_list
                                                        if not (f == "so" and N < 2)]
    for fam, N in cases:
        spec = GroupSpec(fam, N)
        gen = heat_generator(fam, params.s, params.tau)
        dec = build_generator(fam, params, m=3)
        worst = 0.0
        for mono in random_word_monomials(rng, 3, count):
            W = WordPolynomial({mono: 1})
            A = random_group_element(spec, rng, 0.3, complexified=True)
            fd = fd_generator(lambda B: W.evaluate(B), A, spec, params, h) / 2
            symbolic = dec.apply(W, N).evaluate(A)
            worst = max(worst, _rel(fd, symbolic))
            worst = max(worst, _rel(gen.apply(W, N).evaluate(A), symbolic))
        checks.append(_err_check(f"generator on words of degree <= 3, {spec}(C)", worst, 1e-4))
        checks.append(Check(f"trace degree preserved ({fam}, {dec.dim} monomials)", dec.degree_preserving(),
                            "exact" if dec.degree_preserving() else "violated", "exact", 0.0))
    return checks


# quaternions

def suite_quaternion(seed: int = 0, N_list: Sequence[int] | None = None) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []
    q1 = Quaternion(*rng.standard_normal(4))
    q2 = Quaternion(*rng.standard_normal(4))
    checks.append(_err_check("psi multiplicative", _rel(psi_map(q1 * q2), psi_map(q1) @ psi_map(q2)), 1e-12))
    checks.append(_err_check("psi of conjugate is adjoint", _rel(psi_map(q1.conj()), psi_map(q1).conj().T), 1e-12))
    checks.append(_err_check("psi(1) = I", _rel(psi_map(QUAT_UNITS["1"]), np.eye(2)), 0.0))
    omega0 = omega(1)
    checks.append(Check("psi(i) = [[0,-1],[1,0]] = -Omega_0",
                        bool(np.array_equal(psi_map(QUAT_UNITS["i"]), -omega0)),
                        str(psi_map(QUAT_UNITS["i"]).real.tolist()), str((-omega0).tolist()), 0.0))
    for N in (N_list or (1, 2, 3)):
        A = random_quaternion_matrix(N, rng)
        B = random_quaternion_matrix(N, rng)
        checks.append(_err_check(f"Phi multiplicative N={N}", _rel(phi_map(A @ B), phi_map(A) @ phi_map(B)), 1e-12))
        checks.append(_err_check(f"Phi of adjoint N={N}", _rel(phi_map(A.adjoint()), phi_map(A).conj().T), 1e-12))
        checks.append(_err_check(f"normalized trace through Phi N={N}",
                                 abs(ntrace(phi_map(A)) - A.re_trace()), 1e-12))
        basis = quaternion_sp_basis(N)
        gram = np.array([[quaternion_inner(X, Y) for Y in basis] for X in basis])
        spec = GroupSpec("sp", N)
        img = np.array([[spec.inner(phi_map(X), phi_map(Y)) for Y in basis] for X in basis])
        checks.append(_err_check(f"quaternionic basis orthonormal N={N}", _rel(gram, np.eye(len(basis))), 1e-12))
        checks.append(_err_check(f"inner product carried by Phi N={N}", _rel(gram, img), 1e-12))
        U = random_quaternion_unitary(N, rng, 0.5)
        P = random_poly(rng, 3, real=True)
        lhs = P.evaluate(phi_map(U), spec)
        rhs = phi_map(quaternion_eval(P, U))
        checks.append(_err_check(f"trace polynomial through Phi N={N}", _rel(lhs, rhs), 1e-10))
    return checks


# operator structure

def suite_product_rule(seed: int = 0, N_list: Sequence[int] | None = None, trials: int = 10) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []
    worst_rule = worst_exp = 0.0
    for _ in range(trials):
        P = random_poly(rng, 3)
        Q = random_poly(rng, 3, kind="v")
        a, b, tau = (complex(*rng.standard_normal(2)) for _ in range(3))
        op = combination(L0=a, L1_so=b)
        lhs = apply(op, P * Q)
        rhs = apply(op, P) * Q + P * apply(op, Q)
        worst_rule = max(worst_rule, lhs.max_abs_diff(rhs))
        lhs = exp_apply(op, tau / 2, P * Q)
        rhs = exp_apply(op, tau / 2, P) * exp_apply(op, tau / 2, Q)
        worst_exp = max(worst_exp, lhs.max_abs_diff(rhs) / max(1.0, max(abs(complex(c)) for c in lhs.terms.values())))
    checks.append(_err_check("partial product rule", worst_rule, 1e-10))
    checks.append(_err_check("exponential homomorphism", worst_exp, 1e-10))
    for m in (2, 4):
        zero = np.abs(assemble("L1_su", m).entries).max(initial=0.0)
        checks.append(_err_check(f"L1 for SU assembles to zero on C_{m}", zero, 0.0))
    worst = 0.0
    for fam in FAMILIES:
        for N in (N_list or (2, 3, 5)):
            for m in (2, 4):
                full = assemble(DN(fam, N), m).entries
                parts = (assemble("L0", m).entries + assemble(f"L1_{fam}", m).entries / N
                         + assemble(f"L2_{fam}", m).entries / N**2)
                worst = max(worst, np.abs(full - parts).max())
    checks.append(_err_check("D_N = L0 + L1/N + L2/N^2 entrywise", worst, 1e-14))
    worst = 0.0
    for _ in range(trials):
        s = rng.uniform(0.5, 2.0)
        r, phi = rng.uniform(0, 0.9) * s, rng.uniform(0, 2 * np.pi)
        params = TransformParams(s, s + r * np.exp(1j * phi))
        for j in range(-4, 5):
            f = TracePolynomial.u(j)
            worst = max(worst, free_sb(params, free_sb(params, f), inverse=True).max_abs_diff(f))
    checks.append(_err_check("inverse free transform undoes the forward one, |j| <= 4", worst, 1e-9))
    return checks


SUITES: dict[str, Callable[..., list[Check]]] = {
    "magic": suite_magic,
    "counterexample": suite_counterexample,
    "intertwine": suite_intertwine,
    "derivative": suite_derivative,
    "word-generator": suite_word_generator,
    "quaternion": suite_quaternion,
    "product-rule": suite_product_rule,
}


def run_suite(name: str, seed: int = 0, N_list: Sequence[int] | None = None) -> dict:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    start = time.perf_counter()
    checks = SUITES[name](seed=seed, N_list=N_list)
    return {"suite": name, "seed": seed, "N_list": list(N_list) if N_list else None,
            "checks": [c.to_dict() for c in checks], "passed": all(c.passed for c in checks),
            "seconds": round(time.perf_counter() - start, 3)}


__all__ = ["Check", "SUITES", "run_suite", "random_poly", "laplacian_power", "cross_sum_closed",
           "quaternion_eval", "quaternion_fd_laplacian"] + [f"suite_{k.replace('-', '_')}" for k in SUITES]
