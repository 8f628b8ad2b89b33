"""Large-N moment functions and the free Segal-Bargmann transform."""
from __future__ import annotations

import cmath
import math
from decimal import Decimal, localcontext
from fractions import Fraction

from .operators import exp_apply
from .tracepoly import ONE, Monomial, RationalComplex, TracePolynomial, TransformParams

EXACT_BINOMIAL_LIMIT = 64


def nu(k: int, tau: complex) -> complex:
    """Moment function nu_k(tau); nu_0 = 1 and nu_k = nu_{-k}.

    nu_k(tau) = exp(-|k| tau / 2) sum_{j<|k|} (-tau)^j / j! |k|^(j-1) C(|k|, j+1)
    """
    n = abs(int(k))
    if n == 0:
        return 1.0 + 0j
    tau = complex(tau)
    if n <= EXACT_BINOMIAL_LIMIT:
        # exact rational arithmetic on the binary value of tau; the alternating
        # sum cancels badly in floating point once |k tau| is large
        x = -RationalComplex(Fraction(tau.real), Fraction(tau.imag))
        total = RationalComplex(0)
        power = RationalComplex(1)
        for j in range(n):
            total = total + power * Fraction(n ** j * math.comb(n, j + 1), n * math.factorial(j))
            power = power * x
        return cmath.exp(-n * tau / 2) * complex(total)
    if tau == 0:
        return 1.0 + 0j
    return _nu_decimal(n, tau)


def _nu_decimal(n: int, tau: complex) -> complex:
    """Large |k|: the alternating sum in decimal arithmetic.

    Its terms reach about exp(2 n sqrt|tau|) while the sum stays moderate,
    so log-Gamma bounds on the largest term fix the working precision.
    """
    log_tau = math.log(abs(tau))
    biggest = max((j - 1) * math.log(n) - math.lgamma(j + 1) + math.lgamma(n + 1) - math.lgamma(j + 2)
                  - math.lgamma(n - j) + j * log_tau for j in range(n))
    with localcontext() as ctx:
        ctx.prec = 40 + max(0, int(biggest / math.log(10)))
        x, y = Decimal(tau.real), Decimal(tau.imag)
        tr, ti = Decimal(1), Decimal(0)
        sr, si = tr, ti
        for j in range(n - 1):
            r = Decimal(n * (n - j - 1)) / Decimal((j + 1) * (j + 2))
            tr, ti = -(x * tr - y * ti) * r, -(x * ti + y * tr) * r
            sr, si = sr + tr, si + ti
        if not sr and not si:
            return 0j
        e = max(d.adjusted() for d in (sr, si) if d)
        mant = complex(float(sr.scaleb(-e)), float(si.scaleb(-e)))
    return mant * cmath.exp(e * math.log(10) - n * tau / 2)


def pi_tau(tau: complex, P: TracePolynomial) -> TracePolynomial:
    """Replace every v_k by nu_k(tau), leaving u alone."""
    cache: dict[int, complex] = {}

    def value(k):
        if k not in cache:
            cache[k] = nu(k, tau)
        return cache[k]

    out = []
    for mono, c in P.terms.items():
        scalar = c
        for k, e in mono.v:
            scalar = scalar * value(k) ** e
        out.append((Monomial(mono.u), scalar))
    return TracePolynomial(out)


def free_sb(params: TransformParams, f: TracePolynomial, inverse: bool = False) -> TracePolynomial:
    """Free transform on Laurent polynomials.

    Forward: pi_{s - tau} exp((tau/2) L0) f.  Inverse: pi_s exp(-(tau/2) L0) f.
    """
    params.check()
    if not f.is_laurent():
        raise ValueError("the free transform acts on Laurent polynomials in u only")
    tau = complex(params.tau)
    if inverse:
        return pi_tau(params.s, exp_apply("L0", -tau / 2, f))
    return pi_tau(params.s - tau, exp_apply("L0", tau / 2, f))


def free_moment(s: complex, k: int) -> complex:
    """(exp((s/2) L0) v_k) evaluated at v = 1; equals nu_k(s)."""
    return complex(exp_apply("L0", s / 2, TracePolynomial.v(k)).at_ones()) if k else 1.0


__all__ = ["nu", "pi_tau", "free_sb", "free_moment", "ONE"]
