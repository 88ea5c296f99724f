import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.special import exp1

from services.src.channel import ChannelMatrix
from services.src.experiments import (
    BracketFailure,
    CcdfTable,
    ExperimentConfig,
    ExperimentError,
    Scheme,
    SweepPoint,
    SweepResult,
    alpha_comparison_sweep,
    alpha_ls,
    average_secrecy_sum_rate,
    ccdf_alpha_penalty,
    constant_alpha,
    draw_channels,
    golden_section_log,
    large_system_convergence,
    mean_and_stderr,
    optimize_alpha_average,
    optimize_alpha_per_channel,
    power_allocation_sweep,
    run_trials,
    scheme_comparison_sweep,
)
from services.src.initial_setup import Config
from services.src.initial_setup.process_monitor_setup import ProcessMonitor
from services.src.large_system import optimal_secrecy_sum_rate, xi_opt
from services.src.precoder import rci_precoder
from services.src.rates import secrecy_sum_rate


@pytest.fixture
def monitor():
    return ProcessMonitor(enabled=False)


def _search_or_best(search):
    try:
        return search()
    except BracketFailure as e:
        return e.best


def test_run_trials_keeps_order():
    assert run_trials(lambda i: i * i, 50, threads=4) == [i * i for i in range(50)]


def test_run_trials_wraps_failures():
    def trial(i):
        if i == 3:
            raise RuntimeError("boom")
        return i

    with pytest.raises(ExperimentError, match="trial 3"):
        run_trials(trial, 5)


def test_mean_and_stderr():
    assert mean_and_stderr([2.0]) == (2.0, 0.0)
    mean, stderr = mean_and_stderr([1.0, 2.0, 3.0, 4.0])
    assert mean == 2.5
    assert stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2.0)


def test_config_validation():
    config = ExperimentConfig(K=2, M=3, snr_grid_db=[0.0], schemes="rci-ls,CI")
    assert config.schemes == [Scheme.RCI_LS, Scheme.CI]
    with pytest.raises(ValidationError):
        ExperimentConfig(K=4, M=2, snr_grid_db=[0.0], schemes=["ci"])
    with pytest.raises(ValidationError):
        ExperimentConfig(K=2, M=2, snr_grid_db=[0.0], trials=0)
    with pytest.raises(ValidationError):
        ExperimentConfig(K=2, M=2, snr_grid_db=[0.0], schemes=["zf"])
    with pytest.raises(ValidationError):
        ExperimentConfig(K=2, M=2, snr_grid_db=[0.0], bogus=1)


def test_single_user_average_matches_quadrature(monitor):
    rho = 10.0
    config = ExperimentConfig(K=1, M=1, snr_grid_db=[10.0], trials=4000, master_seed=3, threads=1)
    result = average_secrecy_sum_rate(config, constant_alpha(0.5), "scalar", process_monitor=monitor)
    point = result.per_point[0]
    # E[log2(1 + rho |h|^2)] for |h|^2 ~ Exp(1)
    expected = math.exp(1.0 / rho) * exp1(1.0 / rho) / math.log(2.0)
    assert abs(point.mean_rate_bits - expected) <= 4.0 * point.std_err


def test_average_is_repeatable(monitor):
    config = ExperimentConfig(K=3, M=3, snr_grid_db=[0.0, 10.0], trials=1, master_seed=11)
    first = average_secrecy_sum_rate(config, process_monitor=monitor)
    second = average_secrecy_sum_rate(config, process_monitor=monitor)
    assert first.means("rci") == second.means("rci")
    H = draw_channels(3, 3, 1, 11)[0]
    direct = secrecy_sum_rate(H, rci_precoder(H, alpha_ls(10.0, 3)), 0.1).sum_bits
    assert first.per_point[1].mean_rate_bits == pytest.approx(direct, rel=1e-12)


def test_threads_do_not_change_results(monitor):
    base = dict(K=3, M=3, snr_grid_db=[5.0], trials=12, master_seed=5, schemes=["rci-ls", "mf"])
    serial = scheme_comparison_sweep(ExperimentConfig(threads=1, **base), monitor)
    parallel = scheme_comparison_sweep(ExperimentConfig(threads=4, **base), monitor)
    assert [p.mean_rate_bits for p in serial.per_point] == [p.mean_rate_bits for p in parallel.per_point]


def test_golden_section_finds_interior_maximum():
    result = golden_section_log(lambda a: -((math.log(a) - math.log(2.0)) ** 2), 1e-3, 1e3)
    assert result.alpha == pytest.approx(2.0, rel=1e-3)
    assert not result.flat and not result.on_boundary


def test_golden_section_flat_returns_reference():
    result = golden_section_log(lambda a: 1.0, 1e-3, 1e3, reference=0.7)
    assert result.flat
    assert result.alpha == 0.7


def test_golden_section_boundary():
    with pytest.raises(BracketFailure) as info:
        golden_section_log(lambda a: a, 1e-3, 1e3)
    assert info.value.best.alpha == pytest.approx(1e3)
    assert info.value.best.on_boundary


def test_golden_section_bad_range():
    with pytest.raises(ExperimentError):
        golden_section_log(lambda a: a, 1.0, 0.5)


def test_per_channel_identity_is_flat(identity2):
    sigma2 = 0.5
    result = optimize_alpha_per_channel(identity2, sigma2)
    assert result.flat
    assert result.rate_bits == pytest.approx(2 * math.log2(1 + 1 / (2 * sigma2)), rel=1e-9)


def test_per_channel_beats_alpha_ls(make_channel):
    sigma2 = 0.1
    for trial in range(5):
        H = make_channel(4, 4, trial)
        best = _search_or_best(lambda: optimize_alpha_per_channel(H, sigma2))
        reference = secrecy_sum_rate(H, rci_precoder(H, alpha_ls(10.0, 4)), sigma2).sum_bits
        assert best.rate_bits >= reference - 1e-9


def test_per_channel_vanishing_noise_power(random4):
    result = optimize_alpha_per_channel(random4, math.inf)
    assert result.flat
    assert result.rate_bits == 0.0


def test_per_channel_rejects_zero_channel():
    with pytest.raises(ExperimentError):
        optimize_alpha_per_channel(ChannelMatrix(np.zeros((2, 2), dtype=complex)), 0.1)


def test_average_with_one_trial_is_per_channel(monitor):
    H = draw_channels(3, 3, 1, 21)[0]
    averaged = _search_or_best(lambda: optimize_alpha_average(3, 3, 10.0, 1, 21, process_monitor=monitor))
    per_channel = _search_or_best(lambda: optimize_alpha_per_channel(H, 0.1))
    assert averaged.alpha == pytest.approx(per_channel.alpha, rel=1e-12)


def test_ccdf_small_run(monitor):
    table = ccdf_alpha_penalty(2, 10.0, 20, 4, thresholds=[0.1, -1e-9, 0.0], process_monitor=monitor)
    assert table.thresholds == [-1e-9, 0.0, 0.1]
    assert table.trials == 20
    counted = table.trials - table.skipped
    if counted:
        assert table.ccdf[0] == 1.0
        assert table.mean_diff >= 0.0
    assert all(0.0 <= c <= 1.0 for c in table.ccdf)


def test_ccdf_needs_positive_snr(monitor):
    with pytest.raises(ExperimentError):
        ccdf_alpha_penalty(2, 0.0, 5, 0, thresholds=[0.0], process_monitor=monitor)


def test_scheme_comparison_layout(monitor):
    config = ExperimentConfig(
        K=2,
        M=2,
        snr_grid_db=[0.0, 10.0],
        trials=8,
        master_seed=9,
        schemes=["rci-ls", "ci", "rci-xi-inv-rho", "rci-no-secrecy", "rci-fs-per-channel"],
    )
    result = scheme_comparison_sweep(config, monitor)
    assert result.schemes() == [s.value for s in config.schemes]
    assert all(len(result.for_scheme(s)) == 2 for s in result.schemes())
    for secret, open_rate in zip(result.means("rci-xi-inv-rho"), result.means("rci-no-secrecy")):
        assert open_rate >= secret
    for ls, best in zip(result.means("rci-ls"), result.means("rci-fs-per-channel")):
        assert best >= ls - 1e-9
    assert result.metadata["config"]["K"] == 2
    assert all(p.std_err >= 0 for p in result.per_point)


def test_scheme_comparison_vanishes_at_low_snr(monitor):
    config = ExperimentConfig(K=2, M=2, snr_grid_db=[-40.0], trials=8, schemes=["rci-ls", "mf"])
    result = scheme_comparison_sweep(config, monitor)
    assert all(p.mean_rate_bits < 1e-2 for p in result.per_point)


def test_scheme_comparison_averaged_alpha(monitor):
    config = ExperimentConfig(K=2, M=2, snr_grid_db=[10.0], trials=6, master_seed=2, schemes=["rci-ls", "rci-fs-avg"])
    result = scheme_comparison_sweep(config, monitor)
    ls, averaged = result.per_point
    assert averaged.mean_rate_bits >= ls.mean_rate_bits - 1e-9
    assert "boundary" in averaged.extra


def test_power_allocation_sweep_dominance(monitor):
    config = ExperimentConfig(K=2, M=2, snr_grid_db=[10.0], trials=3, master_seed=1)
    result = power_allocation_sweep(config, monitor)
    ep = result.for_scheme("rci-ls")[0]
    pa = result.for_scheme("rci-pa-fixed-alpha")[0]
    joint = result.for_scheme("rci-pa-joint")[0]
    bound = result.for_scheme("misome-bound")[0]
    assert pa.extra["dominance_violations"] == 0.0
    assert joint.extra["dominance_violations"] == 0.0
    assert joint.mean_rate_bits >= pa.mean_rate_bits - 1e-6 >= ep.mean_rate_bits - 2e-6
    assert bound.mean_rate_bits == pytest.approx(0.5 * math.log2(10.0))
    assert bound.n == 0


def test_alpha_comparison_small(monitor):
    result = alpha_comparison_sweep([2], [10.0], trials=6, seed=3, process_monitor=monitor)
    ls, averaged = result.per_point
    assert ls.extra["alpha"] == pytest.approx(2 * xi_opt(10.0))
    assert averaged.mean_rate_bits >= ls.mean_rate_bits - 1e-9
    assert averaged.extra["K"] == 2.0


def test_convergence_columns(monitor):
    result = large_system_convergence([2, 4], snr_db=10.0, trials=10, seed=0, process_monitor=monitor)
    assert [p.extra["K"] for p in result.per_point] == [2.0, 4.0]
    for point in result.per_point:
        K = int(point.extra["K"])
        assert point.extra["closed_form_per_antenna"] == pytest.approx(optimal_secrecy_sum_rate(10.0, K) / K)
        assert point.extra["abs_gap"] >= 0


def test_sweep_csv_round_trip(tmp_path):
    result = SweepResult(
        per_point=[
            SweepPoint(snr_db=0.0, scheme="rci-ls", mean_rate_bits=1.25, std_err=0.1, n=10, extra={"alpha": 0.3}),
            SweepPoint(snr_db=5.0, scheme="ci", mean_rate_bits=0.5, std_err=0.0, n=10),
        ],
        metadata={"kind": "test", "version": "x"},
    )
    path = tmp_path / "sweep.csv"
    text = result.to_csv(path)
    assert text.splitlines()[0].startswith("# metadata: ")
    assert text.splitlines()[1] == "snr_db,scheme,mean_bits,stderr,n,alpha"
    assert SweepResult.from_csv(path) == result


def test_sweep_csv_missing_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("snr_db,scheme\n0,ci\n")
    with pytest.raises(ExperimentError):
        SweepResult.from_csv(path)


def test_ccdf_table_validation(tmp_path):
    with pytest.raises(ValidationError):
        CcdfTable(thresholds=[0.0, 0.1], ccdf=[0.2, 0.5], mean_diff=0.0)
    table = CcdfTable(thresholds=[0.0, 0.1], ccdf=[0.5, 0.2], mean_diff=0.01, trials=10, skipped=1)
    path = tmp_path / "ccdf.csv"
    table.to_csv(path)
    loaded = CcdfTable.from_csv(path)
    assert loaded.ccdf == [0.5, 0.2]
    assert loaded.skipped == 1


def test_config_defaults_follow_environment(monkeypatch):
    monkeypatch.setattr(Config, "DEFAULT_TRIALS", 7)
    monkeypatch.setattr(Config, "DEFAULT_THREADS", 3)
    monkeypatch.setattr(Config, "DEFAULT_MASTER_SEED", 11)
    config = ExperimentConfig(K=2, M=2, snr_grid_db=[0.0])
    assert (config.trials, config.threads, config.master_seed) == (7, 3, 11)


def test_solver_settings_reach_power_allocation(monkeypatch, monitor):
    monkeypatch.setattr(Config, "SCA_MAX_OUTER", 1)
    config = ExperimentConfig(K=4, M=4, snr_grid_db=[10.0], trials=2, master_seed=5, schemes=["rci-pa-fixed-alpha"])
    point = scheme_comparison_sweep(config, monitor).per_point[0]
    assert point.extra["soft_failures"] == 2.0


@pytest.mark.slow
def test_large_system_accuracy_k32(monitor):
    result = large_system_convergence([32], snr_db=10.0, trials=200, seed=0, process_monitor=monitor)
    point = result.per_point[0]
    closed_form = point.extra["closed_form_per_antenna"]
    assert abs(point.mean_rate_bits / 32 - closed_form) < 0.05 * closed_form


@pytest.mark.slow
def test_averaged_alpha_near_large_system_value(monitor):
    best = optimize_alpha_average(4, 4, 10.0, 1000, 0, threads=4, process_monitor=monitor)
    assert abs(best.alpha - 4 * xi_opt(10.0)) < 0.25 * 4 * xi_opt(10.0)


@pytest.mark.slow
def test_alpha_ls_penalty_is_small(monitor):
    table = ccdf_alpha_penalty(4, 10.0, 1000, 0, thresholds=[0.0, 0.05, 0.1], threads=4, process_monitor=monitor)
    assert table.mean_diff < 0.029


@pytest.mark.slow
def test_simulated_secrecy_loss_k32(monitor):
    config = ExperimentConfig(
        K=32, M=32, snr_grid_db=[25.0], trials=1000, threads=4, schemes=["rci-ls", "rci-no-secrecy", "ci"]
    )
    result = scheme_comparison_sweep(config, monitor)
    secrecy = result.means("rci-ls")[0]
    gap = (result.means("rci-no-secrecy")[0] - secrecy) / 32
    assert gap == pytest.approx(0.59, abs=0.05)
    assert secrecy >= result.means("ci")[0]


@pytest.mark.slow
def test_large_system_gap_shrinks_with_k(monitor):
    result = large_system_convergence(
        [4, 8, 16, 32], snr_db=10.0, trials=1000, seed=0, threads=4, process_monitor=monitor
    )
    gaps = [point.extra["abs_gap"] for point in result.per_point]
    assert [point.extra["K"] for point in result.per_point] == [4.0, 8.0, 16.0, 32.0]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


@pytest.mark.slow
def test_power_allocation_dominance_and_gain(monitor):
    config = ExperimentConfig(K=4, M=4, snr_grid_db=[0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0], trials=500, threads=4)
    result = power_allocation_sweep(config, monitor)
    fixed = [p for p in result.per_point if p.scheme == "rci-pa-fixed-alpha"]
    joint = [p for p in result.per_point if p.scheme == "rci-pa-joint"]
    assert len(fixed) == len(joint) == 7
    assert all(p.extra["dominance_violations"] == 0.0 for p in fixed + joint)
    assert max(p.extra["relative_gain"] for p in fixed) >= 0.15
