import numpy as np
import pytest

from services.src.channel import ChannelMatrix, DimensionError
from services.src.precoder import (
    PowerBudgetExceededError,
    PowerVector,
    PrecoderError,
    SingularMatrixError,
    ZeroChannelError,
    apply_power_allocation,
    ci_precoder,
    mf_precoder,
    power_normalization,
    rci_precoder,
)


def test_rci_scalar(scalar_channel):
    W = rci_precoder(scalar_channel, 1.0)
    assert np.allclose(W.columns, [[0.5]])
    assert W.gamma == pytest.approx(0.25, rel=1e-12)


def test_rci_identity(identity2):
    W = rci_precoder(identity2, 0.5)
    assert np.allclose(W.columns, (2.0 / 3.0) * np.eye(2))
    assert W.gamma == pytest.approx(8.0 / 9.0, rel=1e-12)


def test_rci_identity_small_alpha_tends_to_ci(identity2):
    assert np.allclose(rci_precoder(identity2, 1e-12).columns, np.eye(2), atol=1e-9)


def test_power_normalization_examples(scalar_channel, identity2):
    assert power_normalization(scalar_channel, 1.0) == pytest.approx(0.25)
    assert power_normalization(identity2, 0.0) == pytest.approx(2.0)


def test_gamma_matches_column_norms(random4):
    W = rci_precoder(random4, 0.3)
    assert W.gamma == pytest.approx(float(W.column_norms_sq().sum()), rel=1e-10)


def test_dual_form_identity(make_channel):
    for trial in range(10):
        H = make_channel(3, 5, trial)
        for alpha in (0.01, 0.3, 2.0):
            W = rci_precoder(H, alpha).columns
            Hh = H.entries.conj().T
            dual = np.linalg.solve(Hh @ H.entries + alpha * np.eye(5), Hh)
            assert np.linalg.norm(W - dual) <= 1e-9 * np.linalg.norm(W)


def test_gamma_decreasing_in_alpha(random4):
    alphas = np.logspace(-3, 2, 40)
    gammas = [power_normalization(random4, a) for a in alphas]
    assert all(b < a for a, b in zip(gammas, gammas[1:]))


def test_ci_is_limit_of_rci(random4):
    ci = ci_precoder(random4).columns
    distances = [np.linalg.norm(rci_precoder(random4, a).columns - ci) for a in (1e-2, 1e-4, 1e-6)]
    assert distances[0] > distances[1] > distances[2]
    assert distances[2] < 1e-3


def test_ci_identity(identity2):
    assert np.allclose(ci_precoder(identity2).columns, np.eye(2))


def test_ci_right_inverse(make_channel):
    H = make_channel(3, 4)
    assert np.allclose(H.entries @ ci_precoder(H).columns, np.eye(3), atol=1e-9)


def test_ci_needs_k_at_most_m(make_channel):
    with pytest.raises(DimensionError):
        ci_precoder(make_channel(5, 4))


def test_alpha_zero_singular():
    H = ChannelMatrix(np.array([[1.0, 0.0], [2.0, 0.0]], dtype=complex))
    with pytest.raises(SingularMatrixError):
        rci_precoder(H, 0.0)


def test_negative_alpha_rejected(random4):
    with pytest.raises(PrecoderError):
        rci_precoder(random4, -1.0)


def test_mf_scalar_and_identity(identity2):
    W = mf_precoder(ChannelMatrix(np.array([[2.0 + 0j]])))
    assert np.allclose(W.columns, [[2.0]])
    assert W.gamma == pytest.approx(4.0)
    assert np.allclose(mf_precoder(identity2).columns, np.eye(2))


def test_mf_is_large_alpha_direction(random4):
    scaled = rci_precoder(random4, 1e8).columns * 1e8
    mf = mf_precoder(random4).columns
    for k in range(4):
        a, b = scaled[:, k], mf[:, k]
        cosine = abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b))
        assert cosine > 1 - 1e-6


def test_mf_zero_channel():
    with pytest.raises(ZeroChannelError):
        mf_precoder(ChannelMatrix(np.zeros((2, 2), dtype=complex)))


def test_equal_power_fills_budget(random4):
    W = rci_precoder(random4, 0.4)
    allocated = apply_power_allocation(W, PowerVector.equal_power(W))
    assert allocated.trace() == pytest.approx(1.0, rel=1e-12)


def test_zero_power_gives_zero_matrix(random4):
    W = rci_precoder(random4, 0.4)
    allocated = apply_power_allocation(W, np.zeros(4))
    assert not np.any(allocated.effective_columns)


def test_single_user_full_budget(random4):
    W = rci_precoder(random4, 0.4)
    p = np.zeros(4)
    p[0] = 1.0 / W.column_norms_sq()[0]
    assert apply_power_allocation(W, p).trace() == pytest.approx(1.0)


def test_budget_exceeded(random4):
    W = rci_precoder(random4, 0.4)
    with pytest.raises(PowerBudgetExceededError):
        apply_power_allocation(W, 2.0 * PowerVector.equal_power(W).p)


def test_power_vector_length_checked(random4):
    W = rci_precoder(random4, 0.4)
    with pytest.raises(DimensionError):
        apply_power_allocation(W, [0.1, 0.1])


def test_power_vector_log_twin():
    powers = PowerVector.from_powers([0.5, 1e-15, 2.0], p_floor=1e-12)
    assert np.allclose(np.exp(powers.log_p[[0, 2]]), [0.5, 2.0], rtol=1e-12)
    assert powers.muted().tolist() == [False, True, False]


def test_scaled_precoder_keeps_alpha(random4):
    W = rci_precoder(random4, 0.4)
    scaled = W.scaled(3.0)
    assert scaled.gamma == pytest.approx(9.0 * W.gamma)
    with pytest.raises(PrecoderError):
        W.scaled(0.0)
