import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles as O
from segalbargmann import (DN, DiskError, GroupSpec, TracePolynomial, TransformParams, apply, assemble,
                           basis_monomials, boosted_sb, combination, exp_apply, expm, parse_poly)
from segalbargmann.operators import COMPOSITES, PRIMITIVES, OperatorSpec, heat_moment, to_coords

T = TracePolynomial
POOL4 = basis_monomials(4)
POOL6 = basis_monomials(6)


@st.composite
def int_polys(draw, pool=POOL4, max_terms=5):
    picks = draw(st.lists(st.sampled_from(pool), min_size=1, max_size=max_terms, unique=True))
    return T([(m, Fraction(draw(st.integers(-4, 4).filter(bool)))) for m in picks])


def same(P, Q) -> bool:
    return not O.add(O.from_tp(P), O.from_tp(Q), coeffs=[1, -1])


@given(int_polys())
def test_primitives_match_literal_definitions(P):
    for tag in PRIMITIVES:
        assert O.from_tp(apply(tag, P)) == O.LITERAL[tag](O.from_tp(P)), tag


@pytest.mark.parametrize("family", ["so", "su", "sp"])
@given(P=int_polys())
def test_DN_matches_literal_definition(family, P):
    for N in (2, 3, 7):
        assert O.from_tp(apply(DN(family, N), P)) == O.DN(family, N, O.from_tp(P))


def test_Y1_plus_on_u_cubed():
    assert apply("Y1p", T.u(3)) == 2 * T.v(1) * T.u(2) + T.v(2) * T.u(1)


def test_DN_on_u_squared():
    for N in (2, 3, 5, 10):
        expected = T.constant(Fraction(2, N)) - 2 * T.v(1) * T.u(1) - Fraction(2 * (N - 1), N) * T.u(2)
        assert same(apply(DN("so", N), T.u(2)), expected)


def test_number_operator_examples():
    assert apply("N", T.v(2)) == 2 * T.v(2)
    assert apply("N", T.u(-1)) == T.u(-1)
    assert apply("N", T.u(3) * T.v(-2)) == 5 * T.u(3) * T.v(-2)


def test_unitary_first_order_term_vanishes():
    for m in range(4):
        assert not np.any(assemble("L1_su", m).entries)


@pytest.mark.parametrize("tag", sorted(set(PRIMITIVES) | set(COMPOSITES)))
def test_assemble_agrees_with_apply(tag):
    m = 3
    mat = assemble(tag, m)
    assert mat.entries.shape == (len(mat.basis), len(mat.basis))
    for j, mono in enumerate(mat.basis):
        col = to_coords(apply(tag, T.monomial(mono)), m)
        assert np.array_equal(mat.entries[:, j], col)


def test_assemble_sizes_and_constants():
    assert assemble("L0", 1).entries.shape == (5, 5)
    for tag in ["J", "L0", "N", "Y1", "Y2", "Z1", "Z2", "K1", "K2", "L1_so", "L2_so", "L2_su"]:
        assert assemble(tag, 0).entries.tolist() == [[0]]
    assert assemble(DN("sp", 3), 0).entries.tolist() == [[0]]


def test_assemble_DN_decomposition_and_example():
    for fam in ("so", "su", "sp"):
        for N in (2, 5, 13):
            m = 3
            D = assemble(DN(fam, N), m).entries
            parts = assemble("L0", m).entries + assemble(f"L1_{fam}", m).entries / N \
                + assemble(f"L2_{fam}", m).entries / N**2
            assert np.max(np.abs(D - parts)) <= 1e-14
    N = 5
    x = assemble(DN("so", N), 2).entries @ to_coords(T.u(2), 2)
    assert np.allclose(x, to_coords(apply(DN("so", N), T.u(2)), 2))


def test_assemble_is_cached():
    assert assemble(DN("so", 4), 2) is assemble(DN("so", 4), 2)


@pytest.mark.parametrize("tag", sorted(set(PRIMITIVES) | set(COMPOSITES)))
def test_degree_filtration(tag):
    rng = np.random.default_rng(3)
    for _ in range(20):
        picks = rng.choice(len(POOL6), 6, replace=False)
        P = T([(POOL6[i], 1) for i in picks])
        assert apply(tag, P).degree <= P.degree


def test_DN_degree_filtration_all_families():
    for fam in ("so", "su", "u", "sp"):
        for mono in POOL6[::7]:
            assert apply(DN(fam, 4), T.monomial(mono)).degree <= mono.degree


def test_exp_apply_scale_zero_is_identity():
    P = parse_poly("u^2 - 3*v1*v-2*u^-1")
    assert exp_apply(DN("so", 4), 0, P) == P


def example_so(N, tau):
    e, g = cmath.exp(-tau), cmath.exp(2 * tau / N)
    return (T.constant((1 - e) / N) + 0.5 * e * (1 + g) * T.u(2)
            - (N / 2) * e * (g - 1) * T.u(1) * T.v(1))


@pytest.mark.parametrize("N", [3, 5, 10])
@pytest.mark.parametrize("tau", [0.7, 0.4 + 0.3j])
def test_boosted_transform_of_u_squared(N, tau):
    got = boosted_sb(TransformParams(1.0, tau), GroupSpec("so", N), T.u(2))
    assert got.max_abs_diff(example_so(N, tau)) <= 1e-10


@pytest.mark.parametrize("N", [2, 3, 6])
def test_unitary_transform_of_u_squared(N):
    t = 0.8
    op = combination(L0=1, K1m=-2 / N**2, K2m=-1 / N**2)
    got = exp_apply(op, t / 2, T.u(2))
    expected = math.exp(-t) * math.cosh(t / N) * T.u(2) - N * math.exp(-t) * math.sinh(t / N) * T.u(1) * T.v(1)
    assert got.max_abs_diff(expected) <= 1e-12
    # the same operator is DN for the unitary family
    assert exp_apply(DN("u", N), t / 2, T.u(2)).max_abs_diff(expected) <= 1e-12


def test_boosted_inverse_round_trip(rng):
    params = TransformParams(1.0, 0.6 - 0.2j)
    for fam, N in (("so", 4), ("su", 3), ("sp", 2)):
        picks = rng.choice(len(POOL4), 6, replace=False)
        P = T([(POOL4[i], complex(*rng.standard_normal(2))) for i in picks])
        F = boosted_sb(params, GroupSpec(fam, N), P)
        back = boosted_sb(params, GroupSpec(fam, N), F, inverse=True)
        assert back.max_abs_diff(P) <= 1e-9


def test_boosted_small_tau_is_near_identity():
    P = parse_poly("u^2*v1 + v-2")
    got = boosted_sb(TransformParams(1.0, 1e-9), GroupSpec("so", 5), P)
    assert got.max_abs_diff(P) < 1e-7


def test_boosted_disk_violation():
    with pytest.raises(DiskError):
        boosted_sb(TransformParams(1.0, 2.5), GroupSpec("so", 3), T.u(2))


def test_operator_spec_validation():
    with pytest.raises(ValueError):
        OperatorSpec("bogus")
    with pytest.raises(ValueError):
        DN("xx", 3)
    with pytest.raises(ValueError):
        DN("so", 0)


def _induced_norms(M):
    return [np.linalg.norm(M, 1), np.linalg.norm(M, np.inf), np.linalg.norm(M, 2)]


def test_perturbation_bound_random(rng):
    for _ in range(30):
        n = rng.integers(2, 7)
        X = rng.standard_normal((n, n)) * rng.uniform(0.1, 2)
        Y = rng.standard_normal((n, n)) * rng.uniform(1e-3, 1)
        diff = expm(X + Y) - expm(X)
        for norm in (1, np.inf, 2):
            nx, ny = np.linalg.norm(X, norm), np.linalg.norm(Y, norm)
            assert np.linalg.norm(diff, norm) <= ny * math.exp(nx) * math.exp(ny) * (1 + 1e-12)


def test_perturbation_bound_on_trace_operators():
    m = 3
    X = assemble("L0", m).entries
    for fam in ("so", "sp"):
        for N in (4, 16, 64):
            Y = assemble(f"L1_{fam}", m).entries / N + assemble(f"L2_{fam}", m).entries / N**2
            diff = expm(X + Y) - expm(X)
            for norm in (1, np.inf, 2):
                nx, ny = np.linalg.norm(X, norm), np.linalg.norm(Y, norm)
                assert np.linalg.norm(diff, norm) <= ny * math.exp(nx) * math.exp(ny)


def test_heat_moment_closed_form_for_trace():
    # the Laplacian of tr(A) on SO(N) is -(N-1)/N tr(A)
    for N in (2, 5, 9):
        assert abs(heat_moment(GroupSpec("so", N), 1.3, 1) - math.exp(-0.65 * (N - 1) / N)) < 1e-13
    assert heat_moment(GroupSpec("su", 3), 1.0, 0) == 1
