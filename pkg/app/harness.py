"""
시드 고정 실험 하네스

격자 셀(eps 목표, 잡음 크기)마다 trials_per_cell 번: A, x, e, Phi 생성 -> 상수 계산 ->
Phi 로 복원 -> 조건/상한 기록. 시행 난수는 (master_seed, trial_id) 에서만 유도하므로
워커 수와 실행 순서에 관계없이 결과가 같다.
"""

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from dotenv import dotenv_values
from scipy.optimize import linprog

from app import settings
from app.bpdn import bpdn_solve
from app.cosamp import cosamp_recover
from app.ensembles import gen_matrix, gen_noise, gen_perturbed_decoder, gen_signal
from app.errors import ConditionViolationError, CSRecoveryError, InfeasibleSpecError
from app.fixtures import format_float
from app.linalg import spectral_norm
from app.metrics import perturbation_constants, ric_profile, tail_metrics
from app.seeding import (
    STREAM_MATRIX,
    STREAM_NOISE,
    STREAM_PERTURBATION,
    STREAM_RIC,
    STREAM_SIGNAL,
    derive_seed,
)
from app.theory import (
    check_bp_conditions,
    check_cosamp_conditions,
    cosamp_bracket,
    total_noise_param,
)
from schemas import (
    CSV_COLUMNS,
    Algorithm,
    AlgorithmFit,
    BpdnConfig,
    BracketFit,
    CosampConfig,
    EnsembleSpec,
    ExperimentConfig,
    FitReport,
    PerturbationSpec,
    ProblemInstance,
    ScalingRow,
    SignalSpec,
    TrialRecord,
)

logger = logging.getLogger(__name__)

# 이보다 작은 bracket 은 정확 복원 검사로 따로 센다
BRACKET_FLOOR = 1e-12
EXACT_RECOVERY_TOL = 1e-6

LIST_KEYS = ("eps_grid", "noise_grid", "algorithms")


# ---------------------------------------------------------------------------
# 설정 파일
# ---------------------------------------------------------------------------

def config_from_flat(values: Dict[str, str]) -> ExperimentConfig:
    """평면 key = value 사전을 ExperimentConfig 로 변환"""
    values = {k.strip(): (v or "").strip() for k, v in values.items()}
    ensemble_keys = {"kind", "m", "d"}
    signal_keys = {"s", "tail_alpha", "tail_beta"}
    top_keys = set(ExperimentConfig.__fields__) - {"ensemble", "signal"}
    unknown = set(values) - ensemble_keys - signal_keys - top_keys
    if unknown:
        raise InfeasibleSpecError(f"unknown config keys: {', '.join(sorted(unknown))}")

    top = {k: v for k, v in values.items() if k in top_keys}
    for key in LIST_KEYS:
        if key in top:
            top[key] = [item.strip() for item in top[key].split(",") if item.strip()]
    ensemble = {k: values[k] for k in ensemble_keys if k in values}
    signal = {k: values[k] for k in signal_keys if k in values}
    if "d" in values:
        signal["d"] = values["d"]
    return ExperimentConfig(ensemble=ensemble, signal=signal, **top)


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    values = dotenv_values(path)
    if not values:
        raise InfeasibleSpecError(f"{path}: no settings found")
    return config_from_flat(values)


def config_to_flat(cfg: ExperimentConfig) -> Dict[str, str]:
    return {
        "kind": cfg.ensemble.kind.value,
        "m": str(cfg.ensemble.m),
        "d": str(cfg.ensemble.d),
        "s": str(cfg.signal.s),
        "tail_alpha": repr(cfg.signal.tail_alpha),
        "tail_beta": repr(cfg.signal.tail_beta),
        "eps_grid": ", ".join(repr(v) for v in cfg.eps_grid),
        "noise_grid": ", ".join(repr(v) for v in cfg.noise_grid),
        "trials_per_cell": str(cfg.trials_per_cell),
        "algorithms": ", ".join(a.value for a in cfg.algorithms),
        "master_seed": str(cfg.master_seed),
        "budget": str(cfg.budget),
        "mc_samples": str(cfg.mc_samples),
        "cosamp_max_iters": str(cfg.cosamp_max_iters),
        "bpdn_max_iters": str(cfg.bpdn_max_iters),
    }


# ---------------------------------------------------------------------------
# 인스턴스 생성
# ---------------------------------------------------------------------------

def make_instance(
    ensemble: EnsembleSpec,
    signal: SignalSpec,
    eps_target: float,
    noise_level: float,
    seed: int,
    budget: int = settings.DEFAULT_BUDGET,
    mc_samples: int = settings.DEFAULT_MC_SAMPLES,
) -> ProblemInstance:
    """
    seed 하나에서 하위 스트림으로 A, x, Phi, e 를 만든다.
    A 의 order-s 부분행렬 고유값은 한 번만 구해 delta_s 와 ||A||^(s) 로 함께 남긴다.
    """
    s = signal.s
    A = gen_matrix(ensemble.copy(update={"seed": derive_seed(seed, STREAM_MATRIX)}))
    x = gen_signal(signal.copy(update={"seed": derive_seed(seed, STREAM_SIGNAL)}))
    ric_s, norm_sub = ric_profile(A, s, budget, mc_samples, derive_seed(seed, STREAM_RIC, s))
    Phi = gen_perturbed_decoder(
        A,
        PerturbationSpec(target=eps_target, s=s, seed=derive_seed(seed, STREAM_PERTURBATION)),
        budget,
        norm_sub=norm_sub,
    )
    e = gen_noise(ensemble.m, noise_level, derive_seed(seed, STREAM_NOISE))
    return ProblemInstance(A=A, Phi=Phi, x=x, e=e, s=s, ric_s=ric_s, norm_sub=norm_sub)


def trial_cell(cfg: ExperimentConfig, trial_id: int) -> Tuple[float, float]:
    return cfg.cells[trial_id // cfg.trials_per_cell]


def run_trial(cfg: ExperimentConfig, trial_id: int) -> TrialRecord:
    eps_target, noise_level = trial_cell(cfg, trial_id)
    seed = derive_seed(cfg.master_seed, trial_id)
    context = f"cell (eps={eps_target}, noise={noise_level}) trial {trial_id}"
    try:
        return _run_trial(cfg, trial_id, seed, eps_target, noise_level)
    except CSRecoveryError as err:
        raise err.with_context(context)


def _run_trial(cfg: ExperimentConfig, trial_id: int, seed: int, eps_target: float, noise_level: float) -> TrialRecord:
    s = cfg.s
    inst = make_instance(cfg.ensemble, cfg.signal, eps_target, noise_level, seed, cfg.budget, cfg.mc_samples)
    A, Phi, x, e = inst.A, inst.Phi, inst.x, inst.e
    b = inst.b
    y = inst.y
    b_norm = float(np.linalg.norm(b))
    e_norm = float(np.linalg.norm(e))

    # RIC 와 섭동 상수 (order s, 2s, 4s). ||A||^(k) 는 RIC 와 같은 부분집합에서 얻는다
    full_norms = (spectral_norm(A), spectral_norm(A - Phi))
    deltas = {s: inst.ric_s}
    norms = {s: inst.norm_sub}
    pcs = {}
    for k in (s, 2 * s, 4 * s):
        ric_seed = derive_seed(seed, STREAM_RIC, k)
        if k not in deltas:
            deltas[k], norms[k] = ric_profile(A, k, cfg.budget, cfg.mc_samples, ric_seed)
        pcs[k] = perturbation_constants(
            A, Phi, k, deltas[k], cfg.budget,
            mc_samples=cfg.mc_samples, seed=ric_seed, strict=False,
            full_norms=full_norms, norm_sub=norms[k],
        )

    tm = tail_metrics(x, s)
    report = check_bp_conditions(deltas[2 * s], pcs[2 * s], pcs[s], tm).merge(
        check_cosamp_conditions(deltas[4 * s], pcs[4 * s], pcs[s], tm)
    )
    bracket = cosamp_bracket(x, s, pcs[s], b_norm, e_norm)

    eps_total = None
    if b_norm > 0.0:
        try:
            eps_total = total_noise_param(pcs[s], tm, b_norm, e_norm)
        except ConditionViolationError:
            eps_total = None

    values = dict(
        trial_id=trial_id,
        seed=seed,
        eps_target=eps_target,
        noise_level=noise_level,
        eps_sub_rel=pcs[s].eps_sub,
        eps_full_rel=pcs[s].eps_full,
        abs_sub=pcs[s].abs_sub,
        abs_full=pcs[s].abs_full,
        delta_s=deltas[s].delta,
        delta_2s=deltas[2 * s].delta,
        delta_4s=deltas[4 * s].delta,
        ric_method="|".join(deltas[k].method.value for k in (s, 2 * s, 4 * s)),
        alpha_s=tm.alpha,
        beta_s=tm.beta,
        cond_bp_ric=bool(report.bp_ric_ok),
        cond_bp_tail=bool(report.bp_tail_ok),
        cond_cs_ric=bool(report.cosamp_ric_ok),
        cond_cs_tail=bool(report.cosamp_tail_ok),
        bracket_cosamp=bracket.cosamp_total,
        bracket_cosamp_rel=bracket.cosamp_total_relative,
        bp_tail_term=bracket.bp_tail_term,
        eps_total_bp=eps_total,
        margin_bp_ric=report.bp_ric_margin,
        margin_bp_tail=report.bp_tail_margin,
        margin_cs_ric=report.cosamp_ric_margin,
        margin_cs_tail=report.cosamp_tail_margin,
    )

    if Algorithm.cosamp in cfg.algorithms:
        result = cosamp_recover(Phi, y, CosampConfig(s=s, max_iters=cfg.cosamp_max_iters))
        values.update(
            err_cosamp=float(np.linalg.norm(result.estimate - x)),
            iters_cosamp=result.iterations,
            conv_cosamp=result.converged,
        )

    if Algorithm.bpdn in cfg.algorithms:
        # eps_{A,s,b} 가 정의되지 않으면 (delta_s >= 1) 실제 총 잡음 ||y - Phi x|| 를 반지름으로 쓴다.
        # 이 시행은 BP 조건 플래그가 false 라 gated 적합에서 빠지고 ungated 적합에만 들어간다.
        radius = eps_total if eps_total is not None else float(np.linalg.norm(y - Phi @ x))
        result = bpdn_solve(Phi, y, BpdnConfig(epsilon=radius, max_iters=cfg.bpdn_max_iters))
        values.update(
            bp_radius=radius,
            err_bpdn=float(np.linalg.norm(result.solution - x)),
            iters_bpdn=result.iterations,
            conv_bpdn=result.converged,
        )

    return TrialRecord(**values)


def _run_trial_star(args: Tuple[ExperimentConfig, int]) -> TrialRecord:
    return run_trial(*args)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> Tuple[List[TrialRecord], FitReport]:
    trial_ids = list(range(cfg.n_trials))
    logger.info(
        "sweep: %d cells x %d trials, master_seed=%d, workers=%d",
        len(cfg.cells), cfg.trials_per_cell, cfg.master_seed, workers,
    )
    if workers <= 1:
        records = []
        for trial_id in trial_ids:
            if trial_id % cfg.trials_per_cell == 0:
                eps_target, noise_level = trial_cell(cfg, trial_id)
                logger.info("cell eps=%g noise=%g", eps_target, noise_level)
            records.append(run_trial(cfg, trial_id))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_trial_star, [(cfg, t) for t in trial_ids], chunksize=4))
    records.sort(key=lambda r: r.trial_id)
    return records, fit_constants(records, cfg.algorithms)


# ---------------------------------------------------------------------------
# 상수 적합
# ---------------------------------------------------------------------------

def _max_ratio_fit(rows: Sequence[Tuple[float, float, bool]]) -> BracketFit:
    """rows: (error, bracket, is_train). 학습 시행의 max(error / bracket) 를 시험 시행으로 검증"""
    train = [(err, br) for err, br, is_train in rows if is_train and br > BRACKET_FLOOR]
    test = [(err, br) for err, br, is_train in rows if not is_train and br > BRACKET_FLOOR]
    if not train:
        return BracketFit(train_count=0, test_count=len(test))
    constant = max(err / br for err, br in train)
    coverage = residual_max = None
    if test:
        slack = [err - constant * br for err, br in test]
        coverage = sum(1 for r in slack if r <= 0.0) / len(test)
        residual_max = max(slack)
    return BracketFit(
        constant=constant,
        train_count=len(train),
        test_count=len(test),
        coverage=coverage,
        residual_max=residual_max,
    )


def _two_term_fit(rows: Sequence[Tuple[float, float, float, bool]]) -> BracketFit:
    """
    rows: (error, tail term, noise term, is_train).
    min C0 + C1  s.t.  C0 t_i + C1 n_i >= err_i  (학습 시행), C0, C1 >= 0
    """
    train = [(err, t, n) for err, t, n, is_train in rows if is_train and t + n > BRACKET_FLOOR]
    test = [(err, t, n) for err, t, n, is_train in rows if not is_train and t + n > BRACKET_FLOOR]
    if not train:
        return BracketFit(train_count=0, test_count=len(test))
    errs = np.array([r[0] for r in train])
    terms = np.array([[r[1], r[2]] for r in train])
    res = linprog(np.ones(2), A_ub=-terms, b_ub=-errs, bounds=[(0, None), (0, None)], method="highs")
    if not res.success:
        logger.warning("two-term fit failed: %s", res.message)
        return BracketFit(train_count=len(train), test_count=len(test))
    c0, c1 = (max(0.0, float(v)) for v in res.x)
    # linprog 허용오차만큼 모자라는 경우를 덮는다
    scale = max(1.0, float(np.max(errs / np.maximum(terms @ [c0, c1], 1e-300))))
    c0, c1 = c0 * scale, c1 * scale
    coverage = residual_max = None
    if test:
        slack = [err - (c0 * t + c1 * n) for err, t, n in test]
        coverage = sum(1 for r in slack if r <= 0.0) / len(test)
        residual_max = max(slack)
    return BracketFit(
        c0=c0, c1=c1, train_count=len(train), test_count=len(test),
        coverage=coverage, residual_max=residual_max,
    )


def _fit_cosamp(records: Sequence[TrialRecord]) -> AlgorithmFit:
    done = [r for r in records if r.err_cosamp is not None]
    gated = [r for r in done if r.cond_cs_ric and r.cond_cs_tail]
    absolute = lambda rs: [(r.err_cosamp, r.bracket_cosamp, r.is_train) for r in rs]
    relative = lambda rs: [(r.err_cosamp, r.bracket_cosamp_rel, r.is_train) for r in rs]
    exact = [r for r in done if r.bracket_cosamp <= BRACKET_FLOOR]
    return AlgorithmFit(
        algorithm=Algorithm.cosamp,
        gated=_max_ratio_fit(absolute(gated)),
        ungated=_max_ratio_fit(absolute(done)),
        gated_relative=_max_ratio_fit(relative(gated)),
        ungated_relative=_max_ratio_fit(relative(done)),
        exact_recovery_trials=len(exact),
        exact_recovery_ok=sum(1 for r in exact if r.err_cosamp <= EXACT_RECOVERY_TOL),
    )


def _fit_bpdn(records: Sequence[TrialRecord]) -> AlgorithmFit:
    # 잡음 항은 실제로 넘긴 반지름 (조건을 만족하는 시행에서는 eps_{A,s,b} 와 같다)
    done = [r for r in records if r.err_bpdn is not None and r.bp_radius is not None]
    gated = [r for r in done if r.cond_bp_ric and r.cond_bp_tail]
    rows = lambda rs: [(r.err_bpdn, r.bp_tail_term, r.bp_radius, r.is_train) for r in rs]
    exact = [r for r in done if r.bp_tail_term + r.bp_radius <= BRACKET_FLOOR]
    return AlgorithmFit(
        algorithm=Algorithm.bpdn,
        gated=_two_term_fit(rows(gated)),
        ungated=_two_term_fit(rows(done)),
        exact_recovery_trials=len(exact),
        exact_recovery_ok=sum(1 for r in exact if r.err_bpdn <= EXACT_RECOVERY_TOL),
    )


def fit_constants(records: Sequence[TrialRecord], algorithms: Iterable[Algorithm]) -> FitReport:
    fits = []
    algorithms = list(algorithms)
    if Algorithm.cosamp in algorithms:
        fits.append(_fit_cosamp(records))
    if Algorithm.bpdn in algorithms:
        fits.append(_fit_bpdn(records))
    return FitReport(trial_count=len(records), fits=fits)


def median_error_by_cell(records: Sequence[TrialRecord], algorithm: Algorithm) -> Dict[Tuple[float, float], float]:
    field = "err_cosamp" if algorithm == Algorithm.cosamp else "err_bpdn"
    cells: Dict[Tuple[float, float], List[float]] = {}
    for r in records:
        value = getattr(r, field)
        if value is not None:
            cells.setdefault((r.eps_target, r.noise_level), []).append(value)
    return {cell: float(np.median(errs)) for cell, errs in cells.items()}


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _csv_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def records_to_csv(records: Sequence[TrialRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([_csv_value(getattr(r, col)) for col in CSV_COLUMNS])
    return buf.getvalue()


def write_csv(path: Union[str, Path], records: Sequence[TrialRecord]) -> None:
    with open(path, "w", newline="") as f:
        f.write(records_to_csv(records))


# ---------------------------------------------------------------------------
# 신호 크기 스케일링: 곱셈 잡음 vs 가산 잡음
# ---------------------------------------------------------------------------

def scaling_study(
    inst: ProblemInstance,
    scales: Sequence[float],
    cfg: Optional[CosampConfig] = None,
) -> List[ScalingRow]:
    """y = A(c x) + e 로 복원. 가산 잡음은 c 와 함께 줄어들지만 (A-Phi)(c x) 는 c 에 비례한다."""
    cfg = cfg or CosampConfig(s=inst.s)
    rows = []
    for c in scales:
        if c <= 0:
            raise InfeasibleSpecError(f"scales must be positive, got {c}")
        x = inst.x * c
        y = inst.A @ x + inst.e
        est = cosamp_recover(inst.Phi, y, cfg).estimate
        err = float(np.linalg.norm(est - x))
        norm = float(np.linalg.norm(x))
        rows.append(ScalingRow(scale=c, err_abs=err, err_rel=err / norm if norm else math.inf, signal_norm=norm))
    return rows


# ---------------------------------------------------------------------------
# DB 저장 (선택)
# ---------------------------------------------------------------------------

def store_records(session, cfg: ExperimentConfig, records: Sequence[TrialRecord]) -> int:
    """ExperimentRun 과 TrialRow 들을 저장하고 run id 를 돌려준다"""
    import json

    import models

    try:
        run = models.ExperimentRun(
            master_seed=str(cfg.master_seed),
            config_json=json.dumps(config_to_flat(cfg), sort_keys=True),
        )
        session.add(run)
        session.flush()
        for r in records:
            # uint64 시드는 SQL 정수 범위를 넘으므로 문자열로 저장
            session.add(models.TrialRow(run_id=run.id, **{**r.dict(), "seed": str(r.seed)}))
        session.commit()
        logger.info("stored run %d with %d trials", run.id, len(records))
        return run.id
    except Exception:
        session.rollback()
        raise


def load_records(session, run_id: int) -> List[TrialRecord]:
    import models

    rows = (
        session.query(models.TrialRow)
        .filter(models.TrialRow.run_id == run_id)
        .order_by(models.TrialRow.trial_id)
        .all()
    )
    return [TrialRecord.from_orm(row) for row in rows]

