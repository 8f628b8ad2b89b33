import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from segalbargmann import TracePolynomial, TransformParams, heat_moment, GroupSpec, nu
from segalbargmann.rates import (RateResult, concentration_rate, fit_slope, free_limit_rate, moment_rate,
                                 operator_norm_rate)

T = TracePolynomial


@given(st.floats(-4, 4), st.floats(0.1, 10))
def test_fit_slope_recovers_power_law(p, c):
    Ns = [4, 8, 16, 32]
    assert abs(fit_slope(Ns, [c * N**p for N in Ns]) - p) < 1e-9


def test_fit_slope_refusals():
    with pytest.raises(ValueError, match="at least 3"):
        fit_slope([4, 8], [1, 2])
    with pytest.raises(ValueError, match="exact agreement"):
        fit_slope([4, 8, 16], [0, 0, 0])
    with pytest.raises(ValueError):
        fit_slope([4, 8, 16], [1, -1, 2])
    with pytest.raises(ValueError):
        moment_rate("so", 1, 1.0, [4, 8, 8])


def test_concentration_on_SO():
    for P in (T.u(1) * T.v(1), T.v(2)):
        res = concentration_rate("so", P, 1.0, [4, 8, 16, 32])
        assert res.passed, (P.format(), res.slope)


def test_free_limit_both_directions():
    params = TransformParams(1.0, 0.5)
    for direction in ("forward", "inverse"):
        res = free_limit_rate("so", T.u(2), params, [4, 8, 16], direction)
        assert res.passed, (direction, res.slope)
    with pytest.raises(ValueError):
        free_limit_rate("so", T.u(2), params, [4, 8, 16], "sideways")


def test_operator_norm_orders():
    first = operator_norm_rate("so", 3, [16, 32, 64])
    assert first.passed, first.slope
    second = operator_norm_rate("so", 3, [16, 32, 64], order=2)
    assert second.passed, second.slope
    assert all(b < a for a, b in zip(first.values, second.values))


def test_operator_norm_bound_against_limit():
    # ||e^{D_N} - e^{L0}|| <= ||D_N - L0|| e^{max norm}, checked on a small space
    from segalbargmann import DN, assemble
    m, N = 2, 8
    D = assemble(DN("so", N), m).entries
    L0 = assemble("L0", m).entries
    res = operator_norm_rate("so", m, [N, 2 * N, 4 * N])
    bound = np.linalg.norm(D - L0, 2) * math.exp(max(np.linalg.norm(D, 2), np.linalg.norm(L0, 2)))
    assert res.values[0] <= bound


def test_su_moments_converge_at_second_order():
    for k in (1, 2, 3):
        res = moment_rate("su", k, 1.0, [4, 8, 16, 32])
        assert res.passed, (k, res.slope)


def test_so_moment_gap_is_first_order():
    # the SO trace moment carries an explicit 1/N correction
    for N in (8, 16, 32):
        gap = complex(heat_moment(GroupSpec("so", N), 1.0, 1)) - nu(1, 1.0)
        assert abs(gap - 0.5 / N * math.exp(-0.5)) < 1 / N**2
    res = moment_rate("so", 1, 1.0, [8, 16, 32])
    assert abs(res.slope + 1) < 0.1


def test_unitary_first_moment_refuses_fit():
    res = moment_rate("u", 1, 1.0, [4, 8, 16])
    assert max(res.values) < 1e-14
    with pytest.raises(ValueError, match="exact agreement"):
        res.slope


def test_rate_csv():
    res = RateResult("moments", "su", [4, 8, 16], [1.0, 0.25, 0.0625], (-2.4, -1.6))
    lines = res.to_csv().strip().splitlines()
    assert lines[0] == "what,family,N,value,slope,window_lo,window_hi,status"
    assert len(lines) == 4 and lines[1].startswith("moments,su,4,1.0,-2.0")
    assert lines[1].endswith("pass")
