import math

import numpy as np
import pytest

from services.src.channel import ChannelMatrix, DimensionError, remove_row
from services.src.precoder import PowerBudgetExceededError, PowerVector, mf_precoder, rci_precoder
from services.src.rates import (
    RatesError,
    SecrecyRateReport,
    ak_bk,
    gain_matrix,
    rci_sinrs_via_akbk,
    secrecy_sum_rate,
    secrecy_sum_rate_pa,
    sinr_eavesdropper,
    sinr_intended,
    sinr_vectors,
    sum_rate_without_secrecy,
)


def test_scalar_sinr(scalar_channel):
    W = rci_precoder(scalar_channel, 1.0)
    assert sinr_intended(scalar_channel, W, 1.0, 0) == pytest.approx(1.0, rel=1e-12)
    assert sinr_eavesdropper(scalar_channel, W, 1.0, 0) == 0.0


def test_identity_sinr(identity2):
    W = rci_precoder(identity2, 0.5)
    for k in range(2):
        assert sinr_intended(identity2, W, 0.5, k) == pytest.approx(1.0, rel=1e-12)
        assert sinr_eavesdropper(identity2, W, 0.5, k) == pytest.approx(0.0, abs=1e-15)


def test_zero_column_gives_zero_sinr(random4):
    W = rci_precoder(random4, 0.3)
    columns = np.array(W.columns)
    columns[:, 1] = 0.0
    W0 = type(W)(columns=columns, gamma=W.gamma, alpha=W.alpha)
    assert sinr_intended(random4, W0, 0.1, 1) == 0.0


def test_eavesdropper_row_expansion(random4):
    alpha, sigma2 = 0.3, 0.2
    W = rci_precoder(random4, alpha)
    for k in range(4):
        leak = sum(
            abs(np.dot(random4.entries[j], W.columns[:, k])) ** 2 for j in range(4) if j != k
        )
        expected = leak / (W.gamma * sigma2)
        assert sinr_eavesdropper(random4, W, sigma2, k) == pytest.approx(expected, rel=1e-12)


def test_secrecy_sum_rate_examples(scalar_channel, identity2):
    assert secrecy_sum_rate(scalar_channel, rci_precoder(scalar_channel, 1.0), 1.0).sum_bits == pytest.approx(1.0)
    assert secrecy_sum_rate(identity2, rci_precoder(identity2, 0.5), 0.5).sum_bits == pytest.approx(2.0)


def test_infinite_noise_gives_zero(random4):
    report = secrecy_sum_rate(random4, rci_precoder(random4, 0.3), math.inf)
    assert report.sum_bits == 0.0


def test_nonpositive_noise_rejected(random4):
    with pytest.raises(RatesError):
        secrecy_sum_rate(random4, rci_precoder(random4, 0.3), 0.0)


def test_dimension_mismatch(random4, identity2):
    with pytest.raises(DimensionError):
        secrecy_sum_rate(identity2, rci_precoder(random4, 0.3), 1.0)


def test_report_consistency(random4):
    report = secrecy_sum_rate(random4, rci_precoder(random4, 0.05), 0.3)
    assert report.num_users == 4
    for user in report.per_user:
        raw = math.log2(1 + user.sinr_k) - math.log2(1 + user.sinr_ke)
        assert user.rate_bits == pytest.approx(max(0.0, raw), abs=1e-12)
        assert user.clipped == (raw < 0)
    assert report.sum_bits == pytest.approx(float(np.sum(report.rates())), rel=1e-12)
    assert report.unclipped_sum_bits() <= report.sum_bits + 1e-12


def test_clipping_never_lowers_sum():
    report = SecrecyRateReport.from_sinrs([1.0, 0.1], [0.0, 3.0])
    assert report.per_user[1].clipped
    assert report.sum_bits == pytest.approx(1.0)
    assert report.unclipped_sum_bits() < report.sum_bits


def test_scale_invariance(random4):
    W = rci_precoder(random4, 0.3)
    base = sinr_vectors(random4, W, 0.4)
    scaled = sinr_vectors(random4, W.scaled(7.5), 0.4)
    for a, b in zip(base, scaled):
        assert np.allclose(a, b, rtol=1e-10, atol=0)


def test_rate_nonincreasing_in_noise(random4):
    W = rci_precoder(random4, 0.3)
    rates = [secrecy_sum_rate(random4, W, s).sum_bits for s in np.logspace(-3, 2, 30)]
    assert all(b <= a + 1e-12 for a, b in zip(rates, rates[1:]))


def test_akbk_scalar():
    H = ChannelMatrix(np.array([[1.5 - 0.5j]]))
    coeffs = ak_bk(H, 0.7, 0)
    assert coeffs.a_k == pytest.approx(abs(1.5 - 0.5j) ** 2 / 0.7)
    assert coeffs.b_k == 0.0


def test_akbk_identity(identity2):
    coeffs = ak_bk(identity2, 0.5, 1)
    assert coeffs.a_k == pytest.approx(2.0)
    assert coeffs.b_k == pytest.approx(0.0, abs=1e-15)


def test_akbk_psd_ordering(make_channel):
    alpha = 0.4
    for trial in range(10):
        H = make_channel(3, 3, trial)
        for k in range(3):
            coeffs = ak_bk(H, alpha, k)
            others = remove_row(H, k).entries
            gram = others.conj().T @ others
            ratio = gram @ np.linalg.inv(gram + alpha * np.eye(3))
            bound = max(np.linalg.eigvals(ratio).real)
            assert coeffs.a_k >= 0 and coeffs.b_k >= 0
            assert coeffs.b_k <= coeffs.a_k * bound + 1e-12


def test_akbk_needs_positive_alpha(random4):
    with pytest.raises(RatesError):
        ak_bk(random4, 0.0, 0)


def test_akbk_sinr_examples(scalar_channel, identity2):
    scalar = rci_sinrs_via_akbk(scalar_channel, 1.0, 1.0, 0)
    assert scalar.intended == pytest.approx(1.0)
    assert scalar.eavesdropper == 0.0
    pair = rci_sinrs_via_akbk(identity2, 0.5, 0.5, 0)
    assert pair.intended == pytest.approx(1.0)


def test_akbk_identity_matches_direct(make_channel):
    for trial in range(100):
        H = make_channel(4, 4, trial)
        alpha = (0.01, 0.1, 1.0)[trial % 3]
        sigma2 = 0.1
        intended, eavesdropper = sinr_vectors(H, rci_precoder(H, alpha), sigma2)
        for k in range(4):
            pair = rci_sinrs_via_akbk(H, alpha, sigma2, k)
            assert pair.intended == pytest.approx(intended[k], rel=1e-9)
            assert pair.eavesdropper == pytest.approx(eavesdropper[k], rel=1e-9, abs=1e-14)


def test_pa_equal_power_matches_rci(random4):
    W = rci_precoder(random4, 0.3)
    pa = secrecy_sum_rate_pa(random4, W, PowerVector.equal_power(W), 0.2)
    assert pa.sum_bits == pytest.approx(secrecy_sum_rate(random4, W, 0.2).sum_bits, rel=1e-12)


def test_pa_zero_power(random4):
    W = rci_precoder(random4, 0.3)
    assert secrecy_sum_rate_pa(random4, W, np.zeros(4), 0.2).sum_bits == 0.0


def test_pa_single_user(make_channel):
    H = make_channel(1, 3)
    W = rci_precoder(H, 0.5)
    norm_sq = float(W.column_norms_sq()[0])
    sigma2 = 0.25
    expected = math.log2(1 + abs(np.dot(H.entries[0], W.columns[:, 0])) ** 2 / (norm_sq * sigma2))
    assert secrecy_sum_rate_pa(H, W, [1.0 / norm_sq], sigma2).sum_bits == pytest.approx(expected)


def test_pa_budget_enforced(random4):
    W = rci_precoder(random4, 0.3)
    with pytest.raises(PowerBudgetExceededError):
        secrecy_sum_rate_pa(random4, W, np.full(4, 10.0 / W.gamma), 0.2)


def test_sum_rate_without_secrecy_bounds_secrecy(random4):
    W = mf_precoder(random4)
    assert sum_rate_without_secrecy(random4, W, 0.1) >= secrecy_sum_rate(random4, W, 0.1).sum_bits


def test_gain_matrix_shape(random4):
    G = gain_matrix(random4, rci_precoder(random4, 0.3))
    assert G.shape == (4, 4)
    assert np.all(G >= 0)
