"""
CoSaMP, 디코딩 행렬 Phi 가 인코더 A 와 다를 수 있는 형태

    u = Phi^T v,  Omega = supp(u_2s),  T = Omega U supp(a^{k-1})
    w|_T = Phi_T^+ y,  a^k = w_s,  v = y - Phi a^k

정지 조건: ||v|| <= residual_tol ||y||, 한 반복의 상대 잔차 개선 < stagnation_tol,
또는 max_iters.

혼합 연산자에서는 잔차가 커질 수 있다. 그런 반복은 버리고 직전 추정을 돌려주며
stagnation 으로 정지한다 (residual_history 의 마지막 두 값이 같다).
프록시가 전부 0 이면 T 가 비므로 현재 추정 그대로 stagnation 정지.
"""

import logging

import numpy as np

from app.errors import DimensionError, NumericalError
from app.linalg import as_matrix, as_vector, least_squares
from app.metrics import best_s_term
from schemas import CosampConfig, RecoveryResult, StopReason

logger = logging.getLogger(__name__)


def select_proxy_support(u: np.ndarray, k: int) -> np.ndarray:
    """|u| 상위 k 개 (0 이 아닌 것만), 동률이면 작은 인덱스 우선"""
    order = np.argsort(-np.abs(u), kind="stable")[:k]
    order = order[u[order] != 0.0]
    return np.sort(order)


def cosamp_recover(Phi, y, cfg: CosampConfig) -> RecoveryResult:
    Phi = as_matrix(Phi)
    y = as_vector(y)
    m, d = Phi.shape
    s = cfg.s
    if y.shape[0] != m:
        raise DimensionError(f"Phi has {m} rows but y has length {y.shape[0]}")
    if 3 * s > d:
        raise DimensionError(f"merged support 3s={3 * s} can exceed d={d}")

    y_norm = float(np.linalg.norm(y))
    estimate = np.zeros(d)
    history = [y_norm]
    if y_norm == 0.0:
        estimate.setflags(write=False)
        return RecoveryResult(
            estimate=estimate, iterations=0, residual_history=history,
            converged=True, stop_reason=StopReason.residual,
        )

    v = y.copy()
    stop_reason = StopReason.max_iters
    iterations = 0
    for k in range(1, cfg.max_iters + 1):
        iterations = k
        prev = history[-1]

        # 신호 프록시
        u = Phi.T @ v
        omega = select_proxy_support(u, 2 * s)
        T = np.union1d(omega, np.flatnonzero(estimate))
        if T.size == 0:
            history.append(prev)
            stop_reason = StopReason.stagnation
            logger.debug("cosamp iter %d: proxy is zero, stopping", k)
            break

        # 신호 추정 (T 위 최소제곱)
        w = np.zeros(d)
        try:
            w[T] = least_squares(Phi[:, T], y)
        except NumericalError as e:
            raise NumericalError(e.detail, iteration=k) from e

        # 가지치기
        candidate, _ = best_s_term(w, s)
        v_next = y - Phi @ candidate
        r = float(np.linalg.norm(v_next))
        logger.debug("cosamp iter %d: |T|=%d residual=%.3e", k, T.size, r)

        if r > prev:
            # 잔차 증가: 직전 추정 유지
            history.append(prev)
            stop_reason = StopReason.stagnation
            break

        estimate = np.array(candidate)
        v = v_next
        history.append(r)
        if r <= cfg.residual_tol * y_norm:
            stop_reason = StopReason.residual
            break
        if (prev - r) / prev < cfg.stagnation_tol:
            stop_reason = StopReason.stagnation
            break

    estimate.setflags(write=False)
    return RecoveryResult(
        estimate=estimate,
        iterations=iterations,
        residual_history=history,
        converged=stop_reason != StopReason.max_iters,
        stop_reason=stop_reason,
    )
