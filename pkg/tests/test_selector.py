import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from enhanced_lmmse.channel import (OfdmConfig, PilotObservation, build_cir, cir_to_cfr, get_model,
                                    observe_pilot)
from enhanced_lmmse.correlation import (CorrelationVector, ParameterSet, model_correlation,
                                        robust_correlation)
from enhanced_lmmse.errors import SelectionError
from enhanced_lmmse.estimators import (correlation_matrix, empirical_mse,
                                       interpolation_mse_theoretical, lmmse_filter)
from enhanced_lmmse.selector import (FilterBank, SelectionReport, enhanced_lmmse,
                                     evaluation_index, evaluation_index_full,
                                     evaluation_index_split, expected_index, select_parameters,
                                     split_groups)


def white(cfg, label="white"):
    return CorrelationVector(label, np.r_[1.0, np.zeros(cfg.n_lags - 1)])


def draw(model, cfg, snr, seed):
    rng = np.random.default_rng(seed)
    return observe_pilot(cir_to_cfr(build_cir(model, cfg, rng), cfg), snr, 0, rng)


def literal_full_index(obs, r, cfg):
    """Per-carrier loop: interpolate each carrier from all the others."""
    k = cfg.carriers
    err = 0.0
    for i in range(k.size):
        others = np.delete(k, i)
        A = correlation_matrix(r, others) + obs.noise_var * np.eye(k.size - 1)
        c = correlation_matrix(r, k[i:i + 1], others)[0]
        err += abs(c @ np.linalg.solve(A, np.delete(obs.ls, i)) - obs.ls[i]) ** 2
    return err / k.size


def literal_split_index(obs, r, cfg):
    g1, g2 = split_groups(cfg)
    y1, y2 = obs.ls[0::2], obs.ls[1::2]
    nv = obs.noise_var
    h1 = correlation_matrix(r, g1, g2) @ np.linalg.solve(correlation_matrix(r, g2) + nv * np.eye(g2.size), y2)
    h2 = correlation_matrix(r, g2, g1) @ np.linalg.solve(correlation_matrix(r, g1) + nv * np.eye(g1.size), y1)
    return (np.sum(np.abs(h1 - y1) ** 2) + np.sum(np.abs(h2 - y2) ** 2)) / cfg.n_usable


@pytest.fixture
def k8():
    return OfdmConfig(n_fft=64, cp_len=16, usable=(3, 4, 5, 7, 8, 10, 11, 12))


@pytest.mark.parametrize("seed", range(5))
def test_full_index_equals_per_carrier_loop(k8, seed):
    obs = draw(get_model("pedestrian_a"), k8, 3.0, seed)
    for r in (robust_correlation(6, k8), model_correlation(get_model("office_b"), k8)):
        assert np.isclose(evaluation_index_full(obs, r, k8), literal_full_index(obs, r, k8), rtol=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_split_index_equals_block_solves(k8, seed):
    obs = draw(get_model("pedestrian_a"), k8, 3.0, seed)
    r = robust_correlation(6, k8)
    assert np.isclose(evaluation_index_split(obs, r, k8), literal_split_index(obs, r, k8), rtol=1e-10)


def test_odd_split_gives_first_group_the_extra_carrier():
    cfg = OfdmConfig(n_fft=64, cp_len=16, usable=tuple(range(7)))
    g1, g2 = split_groups(cfg)
    assert g1.size == 4 and g2.size == 3


def test_flat_noiseless_channel_scores_zero(k8):
    obs = PilotObservation(np.full(8, 0.6 + 0.2j), np.ones(8), np.full(8, 0.6 + 0.2j), 0.0)
    flat = CorrelationVector("flat", np.ones(k8.n_lags))
    assert evaluation_index_full(obs, flat, k8) < 1e-12
    assert evaluation_index_split(obs, flat, k8) < 1e-12


def test_white_candidate_scores_ls_power(k8, rng):
    ls = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    obs = PilotObservation(ls, np.ones(8), ls, 0.5)
    assert np.isclose(evaluation_index_split(obs, white(k8), k8), np.mean(np.abs(ls) ** 2))
    assert np.isclose(evaluation_index_full(obs, white(k8), k8), np.mean(np.abs(ls) ** 2))


def test_white_candidate_on_coherent_channel_full():
    cfg = OfdmConfig.standard(32, n_fft=64, cp_len=16)
    m = get_model("office_b")
    xi, pw = [], []
    for t in range(1000):
        o = draw(m, cfg, 0.0, t)
        xi.append(evaluation_index_full(o, white(cfg), cfg))
        pw.append(np.mean(np.abs(o.ls) ** 2))
    assert abs(np.mean(xi) / np.mean(pw) - 1) < 0.05


def test_noise_mse_identity_k32():
    """Mean index error equals interpolation MSE plus LS noise variance."""
    cfg = OfdmConfig.standard(32, n_fft=64, cp_len=16)
    m = get_model("pedestrian_a")
    r = model_correlation(m, cfg)
    theory = np.mean([interpolation_mse_theoretical(r, r, 1.0, k, cfg) for k in cfg.carriers]) + 1.0
    xi = [evaluation_index_full(draw(m, cfg, 0.0, t), r, cfg) for t in range(10_000)]
    assert abs(np.mean(xi) / theory - 1) < 0.03


def test_expected_index_matches_monte_carlo(k8):
    m = get_model("office_b")
    r_true = model_correlation(m, k8)
    r_used = robust_correlation(3, k8)
    for method in ("full", "split"):
        xi = [evaluation_index(draw(m, k8, 5.0, t), r_used, k8, method) for t in range(4000)]
        assert abs(np.mean(xi) / expected_index(r_used, r_true, 10 ** -0.5, k8, method) - 1) < 0.05


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 2 * np.pi), st.integers(0, 1000))
def test_common_rotation_leaves_indexes_unchanged(phase, seed):
    cfg = OfdmConfig.standard(16, n_fft=32, cp_len=8)
    o = draw(get_model("pedestrian_a"), cfg, 5.0, seed)
    rot = PilotObservation(o.cfr_true, o.pilot, o.received * np.exp(1j * phase), o.noise_var)
    r = robust_correlation(4, cfg)
    for method in ("full", "split"):
        a, b = evaluation_index(o, r, cfg, method), evaluation_index(rot, r, cfg, method)
        assert np.isfinite(a) and a >= 0
        assert np.isclose(a, b, rtol=1e-9)


def test_singleton_and_ties(k8):
    obs = draw(get_model("office_b"), k8, 0.0, 1)
    r = robust_correlation(4, k8)
    assert select_parameters(obs, ParameterSet([r]), "split", k8).chosen_index == 0
    rep = select_parameters(obs, ParameterSet([r, r.relabel("copy")]), "full", k8)
    assert rep.chosen_index == 0 and rep.xi[0] == rep.xi[1]


def test_bad_method(k8):
    obs = draw(get_model("office_b"), k8, 0.0, 1)
    with pytest.raises(ValueError):
        select_parameters(obs, ParameterSet([robust_correlation(4, k8)]), "loo", k8)


def test_failed_candidates_score_inf(k8):
    obs = draw(get_model("office_b"), k8, 0.0, 1)
    bad = CorrelationVector("bad", np.r_[1.0, -3.0, np.zeros(k8.n_lags - 2)])
    good = robust_correlation(4, k8)
    rep = select_parameters(obs, ParameterSet([bad, good]), "full", k8)
    assert rep.failed == ("bad",) and np.isinf(rep.xi[0]) and rep.chosen_label == good.label
    with pytest.raises(SelectionError):
        select_parameters(obs, ParameterSet([bad]), "full", k8)


def test_true_model_beats_white_at_10db(grid):
    m = get_model("pedestrian_b")
    omega = ParameterSet([model_correlation(m, grid), white(grid)])
    bank = FilterBank(omega, 0.1, grid, "split")
    hits = sum(bank.select(draw(m, grid, 10.0, t).ls).chosen_index == 0 for t in range(200))
    assert hits >= 198


def test_enhanced_singleton_is_plain_lmmse(k8):
    obs = draw(get_model("office_b"), k8, 3.0, 2)
    r = model_correlation(get_model("office_b"), k8)
    est, rep = enhanced_lmmse(obs, ParameterSet([r]), "split", k8)
    assert np.array_equal(est, lmmse_filter(obs.ls, r, obs.noise_var, k8))


def test_enhanced_noiseless_returns_ls(k8):
    obs = draw(get_model("office_b"), k8, float("inf"), 2)
    est, _ = enhanced_lmmse(obs, ParameterSet([robust_correlation(4, k8)]), "full", k8)
    assert np.array_equal(est, obs.ls)


def test_enhanced_beats_robust_on_average(grid):
    m = get_model("pedestrian_a")
    r_true, robust = model_correlation(m, grid), robust_correlation(grid.cp_len, grid)
    bank = FilterBank(ParameterSet([r_true, robust]), 1.0, grid, "split")
    W = bank.filter_matrix(1)
    e_enh = e_rob = 0.0
    for t in range(2000):
        o = draw(m, grid, 0.0, t)
        est, _ = bank.estimate(o.ls)
        e_enh += empirical_mse(est, o.cfr_true)
        e_rob += empirical_mse(W @ o.ls, o.cfr_true)
    assert e_enh <= e_rob


def test_filter_bank_matches_select(k8):
    omega = ParameterSet([robust_correlation(2, k8), robust_correlation(9, k8), white(k8)])
    for method in ("full", "split"):
        bank = FilterBank(omega, 10 ** -0.3, k8, method)
        for t in range(10):
            o = draw(get_model("pedestrian_a"), k8, 3.0, t)
            rep = select_parameters(o, omega, method, k8)
            assert np.allclose(bank.indexes(o.ls), rep.xi, rtol=1e-9)
            assert bank.select(o.ls).chosen_index == rep.chosen_index


def test_report_csv_round_trip(k8):
    o = draw(get_model("office_b"), k8, 0.0, 3)
    omega = ParameterSet([robust_correlation(2, k8), white(k8)])
    rep = select_parameters(o, omega, "split", k8)
    row = rep.to_csv_row(17)
    assert row[:3] == ["17", "split", rep.chosen_label]
    back = SelectionReport.from_csv_row(row, omega.labels)
    assert np.array_equal(back.xi, rep.xi) and back.chosen_index == rep.chosen_index
    assert SelectionReport.csv_header(omega.labels) == ["trial", "method", "chosen_label", "robust2", "white"]
