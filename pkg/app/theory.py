"""
혼합 연산자(인코더 A, 디코더 Phi) 안정성 정리의 조건과 상한

margin 은 항상 (좌변 - 우변). BP 조건은 엄격 부등식(<), CoSaMP 조건은 비엄격(<=).
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from app.errors import ConditionViolationError, DegenerateSignalError, DimensionError
from app.metrics import best_s_term, tail_metrics
from schemas import (
    BoundBracket,
    ConditionReport,
    PerturbationConstants,
    RicEstimate,
    TailMetrics,
)

logger = logging.getLogger(__name__)

# 디코더 RIC 상한 (CoSaMP 보장이 요구하는 delta_4s)
COSAMP_RIC_LIMIT = 0.1


# ---------------------------------------------------------------------------
# 허용 임계값 (delta = 0 에서의 섭동 한계)
# ---------------------------------------------------------------------------

def bp_perturbation_limit() -> float:
    """sqrt(2)/(1+eps)^2 - 1 > 0  <=>  eps < 2^(1/4) - 1"""
    return 2.0 ** 0.25 - 1.0


def cosamp_perturbation_limit() -> float:
    """1.1/(1+eps)^2 - 1 >= 0  <=>  eps <= sqrt(1.1) - 1"""
    return math.sqrt(1.1) - 1.0


def bp_ric_limit(eps_2s: float) -> float:
    return math.sqrt(2.0) / (1.0 + eps_2s) ** 2 - 1.0


def cosamp_ric_limit(eps_4s: float) -> float:
    return 1.1 / (1.0 + eps_4s) ** 2 - 1.0


# ---------------------------------------------------------------------------
# 총 잡음 파라미터와 조건 검사
# ---------------------------------------------------------------------------

def total_noise_param(pc: PerturbationConstants, tm: TailMetrics, b_norm: float, e_norm: float) -> float:
    """
    eps_{A,s,b} = [ (eps^(s) kappa + eps_A gamma alpha) / (1 - kappa (alpha + beta)) + eps_b ] ||b||,
    eps_b = ||e|| / ||b||
    """
    if b_norm <= 0.0:
        raise DegenerateSignalError("||b||_2 must be positive for the total noise parameter")
    if pc.kappa is None or pc.gamma is None:
        raise ConditionViolationError(
            "kappa^(s)_A undefined (delta_s >= 1); tail condition alpha+beta < 1/kappa fails"
        )
    denom = 1.0 - pc.kappa * (tm.alpha + tm.beta)
    if denom <= 0.0:
        raise ConditionViolationError(
            f"tail condition alpha_s + beta_s < 1/kappa^(s)_A violated"
            f" (1 - kappa(alpha+beta) = {denom:.6g})"
        )
    eps_b = e_norm / b_norm
    numer = pc.eps_sub * pc.kappa + pc.eps_full * pc.gamma * tm.alpha
    return (numer / denom + eps_b) * b_norm


def _tail_margin(tm: TailMetrics, pc_s: PerturbationConstants, factor: float) -> Optional[float]:
    if pc_s.kappa is None:
        return None
    return (tm.alpha + tm.beta) - 1.0 / (factor * pc_s.kappa)


def check_bp_conditions(
    delta_2s: RicEstimate,
    pc_2s: PerturbationConstants,
    pc_s: PerturbationConstants,
    tm: TailMetrics,
) -> ConditionReport:
    """delta_2s < sqrt(2)/(1+eps^(2s))^2 - 1  와  alpha_s + beta_s < 1/kappa^(s)"""
    ric_margin = delta_2s.delta - bp_ric_limit(pc_2s.eps_sub)
    tail_margin = _tail_margin(tm, pc_s, 1.0)
    return ConditionReport(
        bp_ric_ok=ric_margin < 0.0,
        bp_ric_margin=ric_margin,
        bp_tail_ok=tail_margin is not None and tail_margin < 0.0,
        bp_tail_margin=tail_margin,
    )


def check_cosamp_conditions(
    delta_4s: RicEstimate,
    pc_4s: PerturbationConstants,
    pc_s: PerturbationConstants,
    tm: TailMetrics,
) -> ConditionReport:
    """delta_4s <= 1.1/(1+eps^(4s))^2 - 1  와  alpha_s + beta_s <= 1/(2 kappa^(s))"""
    ric_margin = delta_4s.delta - cosamp_ric_limit(pc_4s.eps_sub)
    tail_margin = _tail_margin(tm, pc_s, 2.0)
    return ConditionReport(
        cosamp_ric_ok=ric_margin <= 0.0,
        cosamp_ric_margin=ric_margin,
        cosamp_tail_ok=tail_margin is not None and tail_margin <= 0.0,
        cosamp_tail_margin=tail_margin,
        decoder_ric_bound=lemma4_bound(delta_4s, pc_4s.eps_sub),
    )


def lemma4_bound(delta_s: RicEstimate, eps_sub: float) -> float:
    """Phi 의 RIC 상한: (1 + delta_s)(1 + eps^(s))^2 - 1"""
    if eps_sub < 0:
        raise DimensionError(f"eps_sub must be >= 0, got {eps_sub}")
    return (1.0 + delta_s.delta) * (1.0 + eps_sub) ** 2 - 1.0


def decoder_ric_certified(delta_4s: RicEstimate, eps_4s: float) -> bool:
    """CoSaMP RIC 조건이 성립하면 Phi 의 delta_4s 상한도 0.1 이하"""
    return lemma4_bound(delta_4s, eps_4s) <= COSAMP_RIC_LIMIT + 1e-12


# ---------------------------------------------------------------------------
# 오차 상한 항
# ---------------------------------------------------------------------------

def cosamp_bracket(x, s: int, pc: PerturbationConstants, b_norm: float, e_norm: float) -> BoundBracket:
    """
    ||x - x_s||_2,  ||x - x_s||_1 / sqrt(s),  (eps alpha_s + eps^(s)) ||b||_2,  ||e||_2
    eps, eps^(s) 는 절대 노름 ||A-Phi||_2, ||A-Phi||^(s). 상대 상수로 계산한 항도 같이 싣는다.
    """
    x = np.asarray(x, dtype=float)
    tm = tail_metrics(x, s)
    xs, _ = best_s_term(x, s)
    tail = x - xs
    return BoundBracket(
        s=s,
        tail_l2=float(np.linalg.norm(tail)),
        tail_l1=float(np.abs(tail).sum()) / math.sqrt(s),
        multiplicative=(pc.abs_full * tm.alpha + pc.abs_sub) * b_norm,
        noise=e_norm,
        multiplicative_relative=(pc.eps_full * tm.alpha + pc.eps_sub) * b_norm,
    )


def rip_norm_bounds(x, s: int, delta_s: RicEstimate) -> Tuple[float, float]:
    """
    RIP 에서 나오는 ||Ax||_2 의 (하한, 상한):
        상한  sqrt(1+d)(||x|| + ||x||_1/sqrt(s))
        하한  sqrt(1-d)||x_s|| - sqrt(1+d)(||x-x_s|| + ||x-x_s||_1/sqrt(s))
    """
    x = np.asarray(x, dtype=float)
    d = delta_s.delta
    if d >= 1.0:
        raise DimensionError(f"rip_norm_bounds needs delta_s < 1, got {d}")
    xs, _ = best_s_term(x, s)
    tail = x - xs
    root_s = math.sqrt(s)
    upper = math.sqrt(1.0 + d) * (np.linalg.norm(x) + np.abs(x).sum() / root_s)
    lower = math.sqrt(1.0 - d) * np.linalg.norm(xs) - math.sqrt(1.0 + d) * (
        np.linalg.norm(tail) + np.abs(tail).sum() / root_s
    )
    return float(lower), float(upper)


def multiplicative_noise_bound(
    x, s: int, delta_s: RicEstimate, pc: PerturbationConstants, ax_norm: float
) -> Optional[float]:
    """
    ||(A-Phi)x|| <= (||A-Phi|| ||x-x_s|| + ||A-Phi||^(s) ||x_s||) / L * ||Ax||,
    L 은 rip_norm_bounds 의 하한. L <= 0 이면 None.
    """
    x = np.asarray(x, dtype=float)
    lower, _ = rip_norm_bounds(x, s, delta_s)
    if lower <= 0.0:
        return None
    xs, _ = best_s_term(x, s)
    numer = pc.abs_full * np.linalg.norm(x - xs) + pc.abs_sub * np.linalg.norm(xs)
    return float(numer / lower * ax_norm)


def simplified_multiplicative_bound(
    tm: TailMetrics, delta_s: RicEstimate, pc: PerturbationConstants, ax_norm: float
) -> float:
    """꼬리 조건 alpha+beta <= 1/(2 kappa) 아래에서: 2(||A-Phi|| alpha + ||A-Phi||^(s)) / sqrt(1-delta) ||Ax||"""
    if delta_s.delta >= 1.0:
        raise DimensionError(f"needs delta_s < 1, got {delta_s.delta}")
    return 2.0 * (pc.abs_full * tm.alpha + pc.abs_sub) / math.sqrt(1.0 - delta_s.delta) * ax_norm
