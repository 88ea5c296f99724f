import logging
import math

import numpy as np
import pytest

from services.src.large_system import DomainError, xi_opt
from services.src.power_alloc import (
    MaxIterationsExceeded,
    joint_optimize,
    leakage_term_second_derivative,
    pa_objective,
    sca_power_allocation,
    solve_inner_convex,
    tangent_coeffs,
    true_secrecy_rate,
)
from services.src.precoder import PowerVector, rci_precoder
from services.src.rates import (
    RatesError,
    gain_matrix,
    leakage_powers,
    pa_sinr_vectors,
    secrecy_rate_bits,
    secrecy_sum_rate,
    secrecy_sum_rate_pa,
    sinr_vectors,
)

SIGMA2_10DB = 0.1


def _unclipped(H, W, p, sigma2):
    return float(np.sum(secrecy_rate_bits(*pa_sinr_vectors(gain_matrix(H, W), p, sigma2))))


def test_tangent_examples():
    one = tangent_coeffs(1.0)
    assert one.a == 0.5
    assert one.b == pytest.approx(math.log(2.0), rel=1e-12)
    zero = tangent_coeffs(0.0)
    assert (zero.a, zero.b) == (0.0, 0.0)
    assert zero.bound(5.0) == 0.0
    assert tangent_coeffs(3.0).bound(3.0) == pytest.approx(math.log(4.0), abs=1e-12)


def test_tangent_bound_validity():
    rng = np.random.default_rng(2024)
    anchors = rng.uniform(1e-6, 1e3, size=10000)
    points = rng.uniform(1e-6, 1e3, size=10000)
    for z0, z in zip(anchors, points):
        coeffs = tangent_coeffs(float(z0))
        assert 0.0 <= coeffs.a < 1.0
        assert coeffs.bound(float(z)) <= math.log1p(z) + 1e-12
        assert coeffs.bound(float(z0)) == pytest.approx(math.log1p(z0), abs=1e-12)


def test_tangent_rejects_negative_anchor():
    with pytest.raises(DomainError):
        tangent_coeffs(-0.1)


def test_objective_tight_at_anchor(random4):
    W = rci_precoder(random4, 0.4)
    p = PowerVector.equal_power(W).p * np.array([0.5, 1.0, 1.2, 0.8])
    intended, _ = pa_sinr_vectors(gain_matrix(random4, W), p, SIGMA2_10DB)
    coeffs = [tangent_coeffs(float(z)) for z in intended]
    value = pa_objective(random4, W, np.log(p), SIGMA2_10DB, coeffs)
    assert value == pytest.approx(_unclipped(random4, W, p, SIGMA2_10DB), abs=1e-9)


def test_objective_is_lower_bound(random4):
    W = rci_precoder(random4, 0.4)
    rng = np.random.default_rng(5)
    coeffs = [tangent_coeffs(z) for z in (0.3, 2.0, 7.0, 15.0)]
    for _ in range(50):
        log_p = rng.normal(-math.log(W.gamma), 1.0, size=4)
        bound = pa_objective(random4, W, log_p, SIGMA2_10DB, coeffs)
        assert bound <= _unclipped(random4, W, np.exp(log_p), SIGMA2_10DB) + 1e-9


def test_single_user_objective_increasing(make_channel):
    H = make_channel(1, 2)
    W = rci_precoder(H, 0.5)
    coeffs = [tangent_coeffs(2.0)]
    values = [pa_objective(H, W, [x], 0.2, coeffs) for x in np.linspace(-5, 1, 20)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_leakage_second_derivative(random4):
    W = rci_precoder(random4, 0.4)
    leakage = leakage_powers(gain_matrix(random4, W))
    rng = np.random.default_rng(9)
    h = 1e-3
    for _ in range(10):
        log_p = rng.normal(0.0, 1.0, size=4)
        for k in range(4):

            def term(x):
                return -math.log2(1 + math.exp(x) * leakage[k] / SIGMA2_10DB)

            numeric = (term(log_p[k] + h) - 2 * term(log_p[k]) + term(log_p[k] - h)) / h**2
            analytic = leakage_term_second_derivative(random4, W, log_p, SIGMA2_10DB, k)
            assert analytic <= 0
            assert analytic == pytest.approx(numeric, rel=1e-5, abs=1e-8)


def test_inner_single_user_fills_budget(make_channel):
    H = make_channel(1, 3)
    W = rci_precoder(H, 0.5)
    x, diagnostics = solve_inner_convex(H, W, [tangent_coeffs(1.0)], 0.5)
    assert math.exp(x[0]) * W.column_norms_sq()[0] == pytest.approx(1.0, rel=1e-9)
    assert diagnostics.converged


def test_inner_symmetric_instance(identity2):
    W = rci_precoder(identity2, 0.5)
    coeffs = [tangent_coeffs(1.0), tangent_coeffs(1.0)]
    warm = np.log([0.2, 0.5])
    x, diagnostics = solve_inner_convex(identity2, W, coeffs, 0.5, warm_start=warm)
    p = np.exp(x)
    assert p[0] == pytest.approx(p[1], rel=1e-6)
    assert diagnostics.objective_trace[-1] >= diagnostics.objective_trace[0]


def test_inner_warm_start_at_optimum(random4):
    W = rci_precoder(random4, 0.4)
    coeffs = [tangent_coeffs(z) for z in (1.0, 2.0, 3.0, 4.0)]
    x, _ = solve_inner_convex(random4, W, coeffs, SIGMA2_10DB)
    again, diagnostics = solve_inner_convex(random4, W, coeffs, SIGMA2_10DB, warm_start=x)
    assert abs(diagnostics.objective_trace[-1] - diagnostics.objective_trace[0]) < 1e-7
    assert np.dot(W.column_norms_sq(), np.exp(again)) <= 1 + 1e-9


def test_inner_raises_on_request(random4):
    W = rci_precoder(random4, 0.4)
    coeffs = [tangent_coeffs(0.5)] * 4
    with pytest.raises(MaxIterationsExceeded) as info:
        solve_inner_convex(random4, W, coeffs, SIGMA2_10DB, max_newton=1, raise_on_failure=True)
    assert info.value.diagnostics is not None


def test_inner_converges_at_low_snr(make_channel, caplog):
    sigma2 = 1.0
    alpha = 4 * xi_opt(1.0)
    with caplog.at_level(logging.WARNING):
        for trial in range(10):
            H = make_channel(4, 4, trial)
            W = rci_precoder(H, alpha)
            intended, _ = sinr_vectors(H, W, sigma2)
            coeffs = [tangent_coeffs(float(z)) for z in intended]
            _, diagnostics = solve_inner_convex(H, W, coeffs, sigma2)
            assert diagnostics.converged
            assert diagnostics.inner_iterations < 400
        for trial in range(3):
            sca_power_allocation(make_channel(4, 4, trial), alpha, sigma2)
    assert "Inner solver stopped" not in caplog.text
    assert "SCA stopped" not in caplog.text


def test_sca_single_user(make_channel):
    H = make_channel(1, 3)
    sigma2 = 0.3
    powers, diagnostics = sca_power_allocation(H, 0.7, sigma2)
    W = rci_precoder(H, 0.7)
    norm_sq = float(W.column_norms_sq()[0])
    assert powers.p[0] == pytest.approx(1.0 / norm_sq, rel=1e-9)
    gain = abs(np.dot(H.entries[0], W.columns[:, 0])) ** 2
    assert true_secrecy_rate(H, 0.7, powers, sigma2) == pytest.approx(math.log2(1 + gain / (norm_sq * sigma2)))
    assert diagnostics.converged


def test_sca_symmetric_identity(identity2):
    powers, _ = sca_power_allocation(identity2, 0.5, 0.5)
    assert np.allclose(powers.p, 1.125, rtol=1e-6)
    assert true_secrecy_rate(identity2, 0.5, powers, 0.5) == pytest.approx(2.0, rel=1e-9)


def test_sca_improves_on_equal_power(make_channel):
    for trial in range(20):
        H = make_channel(4, 4, trial)
        alpha = 4 * xi_opt(10.0)
        powers, diagnostics = sca_power_allocation(H, alpha, SIGMA2_10DB)
        W = rci_precoder(H, alpha)
        equal = secrecy_sum_rate(H, W, SIGMA2_10DB).sum_bits
        assert secrecy_sum_rate_pa(H, W, powers, SIGMA2_10DB).sum_bits >= equal - 1e-9
        assert powers.power_load(W) <= 1 + 1e-9
        trace = diagnostics.objective_trace
        assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))


def test_sca_infinite_noise(random4):
    powers, diagnostics = sca_power_allocation(random4, 0.4, math.inf)
    assert diagnostics.converged
    assert true_secrecy_rate(random4, 0.4, powers, math.inf) == 0.0


def test_sca_warm_start_length_checked(random4):
    with pytest.raises(ValueError):
        sca_power_allocation(random4, 0.4, SIGMA2_10DB, initial_powers=[0.1, 0.1])


def test_joint_single_user(make_channel):
    H = make_channel(1, 3)
    rho = 10.0
    alpha, powers, _ = joint_optimize(H, 1.0 / rho)
    norm_h = float(np.sum(np.abs(H.entries) ** 2))
    assert alpha > 0
    assert true_secrecy_rate(H, alpha, powers, 1.0 / rho) == pytest.approx(math.log2(1 + rho * norm_h), rel=1e-9)


def test_joint_dominates_fixed_alpha(make_channel):
    sigma2 = 0.01
    alpha_ls = 4 * xi_opt(100.0)
    for trial in range(5):
        H = make_channel(4, 4, trial)
        fixed, _ = sca_power_allocation(H, alpha_ls, sigma2)
        alpha, powers, diagnostics = joint_optimize(H, sigma2)
        assert alpha > 0
        joint_rate = true_secrecy_rate(H, alpha, powers, sigma2)
        assert joint_rate >= true_secrecy_rate(H, alpha_ls, fixed, sigma2) - 1e-6
        trace = diagnostics.objective_trace
        assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))
        assert powers.power_load(rci_precoder(H, alpha)) <= 1 + 1e-9


def test_joint_never_ends_below_its_start(make_channel):
    for snr_db in (0.0, 30.0):
        rho = 10.0 ** (snr_db / 10.0)
        sigma2 = 1.0 / rho
        for trial in range(5):
            H = make_channel(4, 4, trial, seed=31)
            fixed, _ = sca_power_allocation(H, 4 * xi_opt(rho), sigma2)
            alpha, powers, diagnostics = joint_optimize(H, sigma2)
            start = diagnostics.objective_trace[0]
            assert start == pytest.approx(true_secrecy_rate(H, 4 * xi_opt(rho), fixed, sigma2), abs=1e-9)
            assert true_secrecy_rate(H, alpha, powers, sigma2) >= start - 1e-9
            assert true_secrecy_rate(H, alpha, powers, sigma2) == pytest.approx(
                diagnostics.objective_trace[-1], abs=1e-9
            )


def test_joint_rejects_bad_noise(random4):
    with pytest.raises(RatesError):
        joint_optimize(random4, -1.0)


@pytest.mark.slow
def test_sca_improves_on_equal_power_full_scale(make_channel):
    alpha = 4 * xi_opt(10.0)
    for trial in range(100):
        H = make_channel(4, 4, trial, seed=77)
        powers, _ = sca_power_allocation(H, alpha, SIGMA2_10DB)
        W = rci_precoder(H, alpha)
        assert secrecy_sum_rate_pa(H, W, powers, SIGMA2_10DB).sum_bits >= (
            secrecy_sum_rate(H, W, SIGMA2_10DB).sum_bits - 1e-9
        )


@pytest.mark.slow
def test_joint_dominates_fixed_alpha_full_scale(make_channel):
    sigma2 = 0.01
    alpha_ls = 4 * xi_opt(100.0)
    for trial in range(100):
        H = make_channel(4, 4, trial, seed=77)
        fixed, _ = sca_power_allocation(H, alpha_ls, sigma2)
        alpha, powers, _ = joint_optimize(H, sigma2)
        assert true_secrecy_rate(H, alpha, powers, sigma2) >= true_secrecy_rate(H, alpha_ls, fixed, sigma2) - 1e-6
