import csv
import io
import math

import numpy as np
import pytest

from segalbargmann import GroupSpec, TracePolynomial, TransformParams, apply, DN, exp_apply, pi_tau
from segalbargmann.groups import omega
from segalbargmann.heat import (CHUNK, CSV_COLUMNS, MCConfig, batch_trace_power, default_steps, estimate_l2,
                                estimate_moment, exact_moment, increment_covariance, iter_samples, sample_mu,
                                sample_rho, write_csv)

T = TracePolynomial


def test_default_steps_and_floor():
    assert default_steps(1.0) == 200 and default_steps(3.5) == 350
    cfg = MCConfig(GroupSpec("so", 3), TransformParams(1.0, 0.0), samples=5, steps=5)
    assert not cfg.steps_ok
    assert MCConfig(GroupSpec("so", 3), TransformParams(1.0, 0.0), samples=5).steps_ok


def test_config_validation():
    spec = GroupSpec("so", 3)
    with pytest.raises(ValueError):
        MCConfig(spec, TransformParams(1.0, 0.0), samples=0)
    with pytest.raises(ValueError):
        MCConfig(spec, TransformParams(1.0, 0.0), steps=0)
    with pytest.raises(ValueError):
        MCConfig(spec, TransformParams(1.0, 0.0), seed=-1)
    with pytest.raises(ValueError):
        MCConfig(spec, TransformParams(1.0, 2.5))


def test_covariance_matches_generator():
    cov = increment_covariance(TransformParams(1.0, 0.4 + 0.3j), 10)
    assert np.allclose(cov * 10, [[0.8, -0.15], [-0.15, 0.2]])
    # E[(a + i b)^2] = s - tau per unit time, the holomorphic direction
    c = cov * 10
    assert np.isclose(c[0, 0] - c[1, 1] + 2j * c[0, 1], 1.0 - (0.4 + 0.3j))


def test_small_time_gives_identity():
    cfg = MCConfig.rho(GroupSpec("so", 4), 1e-12, samples=10, steps=5)
    A = sample_rho(cfg)
    assert np.allclose(A, np.eye(4), atol=1e-5)


def test_orthogonal_membership_after_200_steps():
    spec = GroupSpec("so", 6)
    A = sample_rho(MCConfig.rho(spec, 1.0, samples=20, steps=200, seed=3))
    I = np.eye(6)
    for M in A:
        assert np.max(np.abs(M.T @ M - I)) < 1e-8
        assert abs(np.linalg.det(M) - 1) < 1e-8


def test_complexified_relations_after_200_steps():
    so = sample_mu(MCConfig(GroupSpec("so", 5), TransformParams(1.0, 0.5 + 0.2j), samples=10, steps=200))
    for M in so:
        assert np.max(np.abs(M.T @ M - np.eye(5))) < 1e-8
        assert abs(np.linalg.det(M) - 1) < 1e-8
    W = omega(2)
    sp = sample_mu(MCConfig(GroupSpec("sp", 2), TransformParams(1.0, 0.7 - 0.3j), samples=10, steps=200))
    for M in sp:
        assert np.max(np.abs(M.T @ W @ M - W)) < 1e-8
    su = sample_mu(MCConfig(GroupSpec("su", 3), TransformParams(1.0, 0.5), samples=10, steps=200))
    for M in su:
        assert abs(np.linalg.det(M) - 1) < 1e-8


def test_reproducible_with_seed():
    cfg = MCConfig.rho(GroupSpec("su", 2), 0.5, samples=300, seed=11, steps=20)
    assert np.array_equal(sample_rho(cfg), sample_rho(cfg))
    other = MCConfig.rho(GroupSpec("su", 2), 0.5, samples=300, seed=12, steps=20)
    assert not np.array_equal(sample_rho(cfg), sample_rho(other))
    # full chunks do not depend on the total sample count
    short = MCConfig.rho(GroupSpec("su", 2), 0.5, samples=CHUNK, seed=11, steps=20)
    assert np.array_equal(sample_rho(short), sample_rho(cfg)[:CHUNK])


def test_k_zero_is_exact():
    est = estimate_moment(MCConfig.rho(GroupSpec("so", 3), 1.0, samples=4), 0)
    assert est.mean == 1 and est.std_error == 0 and est.agrees()


def test_std_error_definition():
    cfg = MCConfig.rho(GroupSpec("so", 3), 1.0, samples=400, steps=20, seed=5)
    est = estimate_moment(cfg, 1)
    values = np.concatenate([batch_trace_power(A, 1) for A in iter_samples(cfg)])
    assert np.isclose(est.mean, values.mean())
    assert np.isclose(est.std_error, np.std(values, ddof=1) / math.sqrt(400))


def test_so10_trace_matches_exact():
    spec = GroupSpec("so", 10)
    est = estimate_moment(MCConfig.rho(spec, 1.0, samples=2000, seed=1), 1)
    exact = exp_apply(DN("so", 10), 0.5, T.v(1)).eval_scalar(1, lambda k: 1)
    assert abs(est.exact_finite_N - exact) < 1e-12
    assert est.agrees(4), est


def test_su3_trace_matches_exact():
    est = estimate_moment(MCConfig.rho(GroupSpec("su", 3), 1.0, samples=2000, seed=2), 1)
    assert est.agrees(4), est


def test_complexified_so10_near_free_limit():
    N = 10
    cfg = MCConfig(GroupSpec("so", N), TransformParams(1.0, 0.5), samples=2000, seed=4)
    est = estimate_moment(cfg, 1)
    assert abs(est.free_limit - math.exp(-0.25)) < 1e-15
    assert abs(est.mean - math.exp(-0.25)) <= 4 * est.std_error + 5 / N**2
    assert est.agrees(4), est


def test_complexified_moment_depends_on_s_minus_tau():
    spec = GroupSpec("sp", 2)
    a = exact_moment(spec, TransformParams(1.0, 0.4 + 0.2j), 2)
    b = exact_moment(spec, TransformParams(1.5, 0.9 + 0.2j), 2)
    assert abs(a - b) < 1e-14


def test_semigroup_two_stage_sampling():
    spec = GroupSpec("so", 4)
    s1, s2 = 0.4, 0.6
    A1 = sample_rho(MCConfig.rho(spec, s1, samples=1500, seed=21, steps=40))
    A2 = sample_rho(MCConfig.rho(spec, s2, samples=1500, seed=22, steps=60))
    direct = sample_rho(MCConfig.rho(spec, s1 + s2, samples=1500, seed=23, steps=100))
    for k in (1, 2):
        x = batch_trace_power(A1 @ A2, k)
        y = batch_trace_power(direct, k)
        se = math.sqrt(np.var(x, ddof=1) / x.size + np.var(y, ddof=1) / y.size)
        assert abs(x.mean() - y.mean()) <= 4 * se


def test_step_refinement():
    spec = GroupSpec("so", 4)
    coarse = estimate_moment(MCConfig.rho(spec, 1.0, samples=1500, seed=31, steps=10), 2)
    fine = estimate_moment(MCConfig.rho(spec, 1.0, samples=1500, seed=32, steps=20), 2)
    gap = abs((coarse.mean - coarse.exact_finite_N) - (fine.mean - fine.exact_finite_N))
    assert gap <= 4 * math.hypot(coarse.std_error, fine.std_error)


def test_l2_estimate_of_u_is_one():
    est = estimate_l2(MCConfig.rho(GroupSpec("so", 4), 1.0, samples=50, steps=50), T.u(1))
    assert abs(est.mean - 1) < 1e-12 and abs(est.exact_finite_N - 1) < 1e-12


@pytest.mark.parametrize("family,N,tau", [("so", 4, 0.0), ("sp", 2, 0.0), ("so", 3, 0.5 + 0.2j)])
def test_l2_estimate_of_centered_poly(family, N, tau):
    s = 1.0
    uv = T.u(1) * T.v(1)
    P = uv - pi_tau(s - tau, uv)
    cfg = MCConfig(GroupSpec(family, N), TransformParams(s, tau), samples=1000, seed=7)
    est = estimate_l2(cfg, P)
    assert abs(est.exact_finite_N) > 1e-3
    assert est.agrees(4), est


def test_l2_on_su_has_no_exact_value():
    est = estimate_l2(MCConfig.rho(GroupSpec("su", 2), 1.0, samples=20, steps=20), T.u(2))
    assert est.exact_finite_N is None and est.z_score is None and not est.agrees()


def test_csv_output():
    cfg = MCConfig(GroupSpec("so", 3), TransformParams(1.0, 0.5 + 0.1j), samples=20, steps=20, seed=9)
    text = write_csv([estimate_moment(cfg, 1), estimate_l2(cfg, T.u(2))])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert tuple(rows[0].keys()) == CSV_COLUMNS
    assert rows[0]["k_or_poly_hash"] == "k=1" and rows[1]["k_or_poly_hash"].startswith("poly:")
    assert rows[0]["seed"] == "9" and rows[0]["steps"] == "20" and rows[0]["tau_im"] == "0.1"
    assert float(rows[0]["limit_re"]) == pytest.approx((np.exp(-(0.5 - 0.1j) / 2)).real)
    buf = io.StringIO()
    write_csv([], buf)
    assert buf.getvalue().strip() == ",".join(CSV_COLUMNS)


def test_generator_sanity_against_DN():
    # the rho moments are e^{(s/2) D_N} evaluated at the identity
    spec = GroupSpec("sp", 3)
    e = exact_moment(spec, TransformParams(0.8, 0.0), 3)
    direct = exp_apply(DN("sp", 3), 0.4, T.v(3)).eval_scalar(1, lambda k: 1)
    assert abs(e - direct) < 1e-12
    assert apply(DN("sp", 3), T.constant(1)).terms == {}
