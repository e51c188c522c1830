from pathlib import Path

import numpy as np
import pytest

from app.errors import InfeasibleSpecError
from app.metrics import submatrix_norm_max
from app.harness import (
    config_from_flat,
    fit_constants,
    load_config,
    make_instance,
    median_error_by_cell,
    records_to_csv,
    run_experiment,
    run_trial,
    scaling_study,
)
from schemas import CSV_COLUMNS, Algorithm, EnsembleSpec, SignalSpec, TrialRecord

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def small_config(**overrides):
    values = {
        "kind": "gaussian",
        "m": "8",
        "d": "16",
        "s": "2",
        "eps_grid": "0, 0.02",
        "noise_grid": "0, 0.05",
        "trials_per_cell": "3",
        "algorithms": "cosamp, bpdn",
        "master_seed": "42",
        "bpdn_max_iters": "20000",
    }
    values.update(overrides)
    return config_from_flat(values)


def record(trial_id, err, bracket, *, ok=True, err_bpdn=None, tail=0.0, eps_total=None):
    return TrialRecord(
        trial_id=trial_id, seed=trial_id, eps_target=0.0, noise_level=0.0,
        eps_sub_rel=0.0, eps_full_rel=0.0, abs_sub=0.0, abs_full=0.0,
        delta_s=0.0, delta_2s=0.0, delta_4s=0.0, ric_method="exact|exact|exact",
        alpha_s=0.0, beta_s=0.0,
        cond_bp_ric=ok, cond_bp_tail=ok, cond_cs_ric=ok, cond_cs_tail=ok,
        err_cosamp=err, bracket_cosamp=bracket, bracket_cosamp_rel=bracket,
        err_bpdn=err_bpdn, bp_tail_term=tail, eps_total_bp=eps_total, bp_radius=eps_total,
    )


def test_shipped_configs_load():
    cfg = load_config(CONFIGS / "default.conf")
    assert (cfg.ensemble.m, cfg.ensemble.d, cfg.s) == (25, 50, 3)
    assert cfg.eps_grid == [0.0, 0.005, 0.01, 0.02]
    assert cfg.noise_grid == [0.0, 0.05, 0.1]
    assert cfg.n_trials == 12 * 50
    assert cfg.algorithms == [Algorithm.cosamp, Algorithm.bpdn]
    exact = load_config(CONFIGS / "exact.conf")
    assert (exact.ensemble.m, exact.ensemble.d, exact.s) == (8, 16, 2)


def test_config_rejects_unknown_keys_and_bad_values(tmp_path):
    with pytest.raises(InfeasibleSpecError, match="colour"):
        small_config(colour="blue")
    path = tmp_path / "bad.conf"
    path.write_text("m = 8\nd = 16\ns = 5\neps_grid = 0\nnoise_grid = 0\ntrials_per_cell = 1\n")
    with pytest.raises(ValueError, match="4s"):
        load_config(path)


def test_trial_ids_run_cell_major():
    cfg = small_config()
    assert cfg.cells == [(0.0, 0.0), (0.0, 0.05), (0.02, 0.0), (0.02, 0.05)]
    rec = run_trial(cfg, 4)
    assert (rec.eps_target, rec.noise_level) == (0.0, 0.05)
    assert rec.ric_method == "exact|exact|exact"


def test_make_instance_streams_are_independent():
    ens, sig = EnsembleSpec(m=8, d=16), SignalSpec(d=16, s=2)
    a = make_instance(ens, sig, 0.0, 0.0, seed=1)
    b = make_instance(ens, sig, 0.05, 0.1, seed=1)
    np.testing.assert_array_equal(a.A, b.A)
    np.testing.assert_array_equal(a.x, b.x)
    np.testing.assert_array_equal(a.Phi, a.A)
    assert np.linalg.norm(b.e) == pytest.approx(0.1)
    assert a.ric_s == b.ric_s
    assert a.norm_sub == pytest.approx(submatrix_norm_max(a.A, 2), rel=1e-10)


def test_run_experiment_records_and_csv():
    cfg = small_config()
    records, report = run_experiment(cfg)
    assert [r.trial_id for r in records] == list(range(12))
    csv_text = records_to_csv(records)
    lines = csv_text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 13
    first = dict(zip(CSV_COLUMNS, lines[1].split(",")))
    assert first["cond_bp_ric"] in ("true", "false")
    # Phi = A, e = 0, 희소 신호: bracket 이 0
    for r in records[:3]:
        assert r.bracket_cosamp == 0.0
        assert r.eps_total_bp is None or r.eps_total_bp == 0.0
    assert report.for_algorithm(Algorithm.cosamp).exact_recovery_trials >= 3
    assert csv_text == records_to_csv(run_experiment(cfg)[0])


def test_bpdn_radius_is_total_noise_param_when_defined():
    cfg = small_config(algorithms="bpdn", trials_per_cell="1")
    for r in run_experiment(cfg)[0]:
        assert r.err_bpdn is not None and r.iters_bpdn is not None
        if r.eps_total_bp is not None:
            assert r.bp_radius == r.eps_total_bp
        assert r.err_cosamp is None and r.iters_cosamp is None


def test_bpdn_runs_at_default_scale_without_total_noise_param():
    cfg = config_from_flat({
        "m": "25", "d": "50", "s": "3", "eps_grid": "0.01", "noise_grid": "0.05",
        "trials_per_cell": "4", "algorithms": "bpdn", "mc_samples": "200",
    })
    records, report = run_experiment(cfg)
    assert any(r.delta_s >= 1.0 for r in records)
    for r in records:
        assert r.err_bpdn is not None and r.conv_bpdn is not None
        if r.eps_total_bp is None:
            inst = make_instance(cfg.ensemble, cfg.signal, r.eps_target, r.noise_level, r.seed, cfg.budget, cfg.mc_samples)
            assert r.bp_radius == pytest.approx(np.linalg.norm(inst.y - inst.Phi @ inst.x), rel=1e-12)
            assert not (r.cond_bp_ric and r.cond_bp_tail)
    fit = report.for_algorithm(Algorithm.bpdn)
    assert fit.ungated.train_count + fit.ungated.test_count == 4
    csv_rows = records_to_csv(records).splitlines()[1:]
    assert all(dict(zip(CSV_COLUMNS, line.split(",")))["err_bpdn"] for line in csv_rows)


@pytest.mark.slow
def test_worker_count_does_not_change_csv():
    cfg = small_config()
    single = records_to_csv(run_experiment(cfg, workers=1)[0])
    assert records_to_csv(run_experiment(cfg, workers=2)[0]) == single
    assert records_to_csv(run_experiment(cfg, workers=4)[0]) == single


@pytest.mark.slow
def test_exact_recovery_cell():
    cfg = config_from_flat({
        "m": "25", "d": "50", "s": "3", "eps_grid": "0", "noise_grid": "0",
        "trials_per_cell": "20", "algorithms": "cosamp", "mc_samples": "200",
    })
    records, report = run_experiment(cfg)
    fit = report.for_algorithm(Algorithm.cosamp)
    assert fit.exact_recovery_trials == 20
    assert fit.exact_recovery_ok >= 19
    assert fit.gated.train_count == 0


@pytest.mark.slow
def test_median_error_grows_with_perturbation():
    cfg = config_from_flat({
        "m": "25", "d": "50", "s": "3", "eps_grid": "0, 0.01, 0.02, 0.04", "noise_grid": "0",
        "trials_per_cell": "50", "algorithms": "cosamp", "mc_samples": "200",
    })
    medians = median_error_by_cell(run_experiment(cfg)[0], Algorithm.cosamp)
    values = [medians[(eps, 0.0)] for eps in cfg.eps_grid]
    assert all(a <= b for a, b in zip(values, values[1:]))
    assert values[-1] > values[0]


@pytest.mark.slow
def test_held_out_trials_stay_under_fitted_bound():
    cfg = config_from_flat({
        "m": "25", "d": "50", "s": "3", "eps_grid": "0.005, 0.02", "noise_grid": "0.05, 0.1",
        "trials_per_cell": "60", "algorithms": "cosamp, bpdn", "mc_samples": "200",
    })
    _, report = run_experiment(cfg)
    for algorithm in (Algorithm.cosamp, Algorithm.bpdn):
        fit = report.for_algorithm(algorithm).ungated
        assert fit.train_count == fit.test_count == 120
        assert fit.coverage >= 0.95


def test_max_ratio_fit_uses_train_and_validates_on_test():
    records = [
        record(0, 1.0, 1.0),   # train, ratio 1
        record(2, 3.0, 2.0),   # train, ratio 1.5
        record(1, 1.2, 1.0),   # test, covered
        record(3, 4.0, 2.0),   # test, not covered
        record(4, 50.0, 1.0, ok=False),  # 조건 불만족: gated 에서 제외
        record(5, 0.0, 0.0),   # bracket 0: 정확 복원 검사
    ]
    fit = fit_constants(records, [Algorithm.cosamp]).for_algorithm(Algorithm.cosamp)
    assert fit.gated.constant == pytest.approx(1.5)
    assert (fit.gated.train_count, fit.gated.test_count) == (2, 2)
    assert fit.gated.coverage == pytest.approx(0.5)
    assert fit.gated.residual_max == pytest.approx(1.0)
    assert fit.ungated.constant == pytest.approx(50.0)
    assert (fit.exact_recovery_trials, fit.exact_recovery_ok) == (1, 1)


def test_two_term_fit_covers_linear_errors():
    records = [
        record(i, None, 0.0, err_bpdn=2.0 * t + 3.0 * n, tail=t, eps_total=n)
        for i, (t, n) in enumerate([(0.1, 0.0), (0.2, 0.1), (0.0, 0.1), (0.1, 0.3), (0.3, 0.2), (0.05, 0.05)])
    ]
    fit = fit_constants(records, [Algorithm.bpdn]).for_algorithm(Algorithm.bpdn)
    assert fit.gated.c0 == pytest.approx(2.0, rel=1e-6)
    assert fit.gated.c1 == pytest.approx(3.0, rel=1e-6)
    assert fit.gated.test_count == 3
    assert fit.gated.residual_max <= 1e-9


def test_empty_gated_fit_has_no_constant():
    fit = fit_constants([record(0, 1.0, 1.0, ok=False)], [Algorithm.cosamp]).for_algorithm(Algorithm.cosamp)
    assert fit.gated.constant is None and fit.gated.train_count == 0
    assert fit.ungated.constant == pytest.approx(1.0)


def test_scaling_study_multiplicative_noise_is_homogeneous():
    inst = make_instance(EnsembleSpec(m=25, d=50), SignalSpec(d=50, s=3), 0.02, 0.0, seed=3)
    rows = scaling_study(inst, [0.5, 1.0, 2.0, 4.0])
    ratios = [row.err_abs / row.scale for row in rows]
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-8)
    np.testing.assert_allclose([row.err_rel for row in rows], rows[0].err_rel, rtol=1e-8)


def test_scaling_study_additive_noise_fades():
    inst = make_instance(EnsembleSpec(m=25, d=50), SignalSpec(d=50, s=3), 0.0, 0.01, seed=3)
    rows = scaling_study(inst, [1.0, 2.0, 4.0, 8.0])
    rel = [row.err_rel for row in rows]
    assert all(b < a for a, b in zip(rel, rel[1:]))
    with pytest.raises(InfeasibleSpecError):
        scaling_study(inst, [0.0])


def test_trial_errors_carry_cell_coordinates():
    cfg = small_config(tail_alpha="0.1", tail_beta="0.05", trials_per_cell="1")
    with pytest.raises(InfeasibleSpecError, match=r"^cell \(eps=0.0, noise=0.0\) trial 0: l1 >= l2"):
        run_experiment(cfg)
