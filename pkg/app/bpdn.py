"""
Basis Pursuit denoising:  min ||z||_1  s.t.  ||Phi z - y||_2 <= epsilon

1차 primal-dual (Chambolle-Pock) 분할:
    z+ = soft(z - tau Phi^T p, tau)
    p+ = prox_{sigma g*}(p + sigma Phi (2 z+ - z)),  g = ball(y, epsilon) 지시함수
prox_{sigma g*}(q) = q - sigma proj_ball(q / sigma).

tau = ||y|| / ||Phi||, sigma = 0.99 / (tau ||Phi||^2) 로 두면 (c Phi, c y, c epsilon)
스케일에 대해 반복열이 그대로 대응된다.

POLISH_EVERY 반복마다 현재 반복의 지지집합 S 와 부호 sgn 을 고정한 부분문제

    min sgn^T z_S  s.t.  ||Phi_S z_S - y|| <= epsilon

를 닫힌 꼴로 푼다 (활성 집합 부분공간 단계). 그 해의 쌍대 벡터로 만든 하한과의
간격이 CERTIFY_RTOL 이하이면 최적해로 보고 멈춘다. 끝나면 최소 노름 보정으로
잔차를 공 위로 옮기고, 가능한 쌍대 목적값을 함께 돌려준다.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from app.errors import DimensionError
from app.linalg import as_matrix, as_vector, least_squares, normal_solve_pair, spectral_norm
from schemas import BpdnConfig, BpdnResult

logger = logging.getLogger(__name__)

STEP_SAFETY = 0.99

POLISH_EVERY = 200
# 지지집합 판정: |z_i| > rtol * max|z|
SUPPORT_RTOLS = (1e-3, 1e-5, 1e-7, 1e-9)
CERTIFY_RTOL = 1e-10


def soft_threshold(z: np.ndarray, t: float) -> np.ndarray:
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def project_ball(w: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    r = w - center
    norm = np.linalg.norm(r)
    if norm <= radius:
        return w
    return center + r * (radius / norm)


def dual_objective(Phi: np.ndarray, y: np.ndarray, epsilon: float, q: np.ndarray) -> float:
    """q 를 ||Phi^T q||_inf <= 1 로 축소한 뒤 <q, y> - epsilon ||q||"""
    scale = max(1.0, float(np.max(np.abs(Phi.T @ q))))
    q = q / scale
    return float(q @ y - epsilon * np.linalg.norm(q))


def _restore_feasibility(Phi: np.ndarray, y: np.ndarray, z: np.ndarray, epsilon: float) -> np.ndarray:
    # 잔차가 공 밖이면 최소 노름 보정으로 경계 위에 올린다
    r = Phi @ z - y
    norm = np.linalg.norm(r)
    if norm <= epsilon:
        return z
    target = r * (epsilon / norm)
    return z - least_squares(Phi, r - target)


def _solve_on_support(
    Phi: np.ndarray, y: np.ndarray, epsilon: float, S: np.ndarray, sgn: np.ndarray,
) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """
    (z, q): 고정 부호 부분문제의 해와 쌍대 벡터 (Phi_S^T q = sgn).
    z_S = Phi_S^+ y - lam (Phi_S^T Phi_S)^{-1} sgn,  lam 은 잔차가 epsilon 이 되는 값.
    부호가 유지되지 않거나 Phi_S 가 계수 부족이면 None.
    """
    Phi_S = Phi[:, S]
    pair = normal_solve_pair(Phi_S, y, sgn)
    if pair is None:
        return None
    z_ls, g = pair
    r0 = y - Phi_S @ z_ls
    t = Phi_S @ g
    t_norm = float(np.linalg.norm(t))
    r0_norm = float(np.linalg.norm(r0))
    if t_norm == 0.0 or r0_norm > epsilon + 1e-12 * float(np.linalg.norm(y)):
        return None
    lam = math.sqrt(max(0.0, epsilon * epsilon - r0_norm * r0_norm)) / t_norm
    z_S = z_ls - lam * g
    if np.any(sgn * z_S <= 0.0):
        return None
    z = np.zeros(Phi.shape[1])
    z[S] = z_S
    q = t + r0 / lam if lam > 0.0 else t
    return z, q


def _polish(Phi: np.ndarray, y: np.ndarray, epsilon: float, z: np.ndarray) -> Optional[Tuple[np.ndarray, float]]:
    """(해, 쌍대 하한) 중 간격이 가장 작은 것. 후보가 없으면 None."""
    peak = float(np.max(np.abs(z)))
    if peak == 0.0:
        return None
    best = None
    seen = set()
    for rtol in SUPPORT_RTOLS:
        S = np.flatnonzero(np.abs(z) > rtol * peak)
        if S.size > Phi.shape[0] or tuple(S) in seen:
            continue
        seen.add(tuple(S))
        found = _solve_on_support(Phi, y, epsilon, S, np.sign(z[S]))
        if found is None:
            continue
        cand = found[0]
        bound = dual_objective(Phi, y, epsilon, found[1])
        gap = float(np.abs(cand).sum()) - bound
        if best is None or gap < best[2]:
            best = (cand, bound, gap)
    return None if best is None else (best[0], best[1])


def _certified(z: np.ndarray, bound: float) -> bool:
    objective = float(np.abs(z).sum())
    return objective - bound <= CERTIFY_RTOL * max(objective, 1e-300)


def _result(Phi, y, cfg, z, bound, iterations, converged) -> BpdnResult:
    z = np.array(z)
    z.setflags(write=False)
    objective = float(np.abs(z).sum())
    slack = cfg.epsilon - float(np.linalg.norm(Phi @ z - y))
    return BpdnResult(
        solution=z,
        objective=objective,
        constraint_slack=slack,
        iterations=iterations,
        converged=converged,
        dual_bound=bound,
        duality_gap=objective - bound,
    )


def bpdn_solve(Phi, y, cfg: BpdnConfig) -> BpdnResult:
    Phi = as_matrix(Phi)
    y = as_vector(y)
    m, d = Phi.shape
    if y.shape[0] != m:
        raise DimensionError(f"Phi has {m} rows but y has length {y.shape[0]}")

    eps = cfg.epsilon
    y_norm = float(np.linalg.norm(y))
    # 0 벡터가 가능하면 그것이 l1 최소
    if y_norm <= eps:
        return _result(Phi, y, cfg, np.zeros(d), 0.0, 0, True)

    phi_norm = spectral_norm(Phi)
    if phi_norm == 0.0:
        # Phi = 0 이면 어떤 z 도 공 안에 들지 못한다
        logger.warning("bpdn: Phi is zero and ||y|| = %.3e > epsilon; infeasible", y_norm)
        return _result(Phi, y, cfg, np.zeros(d), 0.0, 0, False)

    tau = y_norm / phi_norm
    sigma = STEP_SAFETY / (tau * phi_norm * phi_norm)

    z = np.zeros(d)
    p = np.zeros(m)
    converged = False
    polished = None
    iterations = 0
    for k in range(1, cfg.max_iters + 1):
        iterations = k
        z_next = soft_threshold(z - tau * (Phi.T @ p), tau)
        q = p + sigma * (Phi @ (2.0 * z_next - z))
        p = q - sigma * project_ball(q / sigma, y, eps)

        change = np.linalg.norm(z_next - z) / max(np.linalg.norm(z_next), 1e-300)
        z = z_next
        violation = (np.linalg.norm(Phi @ z - y) - eps) / y_norm
        if change < cfg.primal_tol and violation < cfg.dual_tol:
            converged = True
            break
        if k % POLISH_EVERY == 0:
            polished = _polish(Phi, y, eps, z)
            if polished is not None and _certified(*polished):
                converged = True
                break

    # 반복 해와 부분공간 해 중 목적값이 작은 쪽, 하한은 둘 중 큰 쪽
    z = _restore_feasibility(Phi, y, z, eps)
    bound = dual_objective(Phi, y, eps, -p)
    if polished is None or not _certified(*polished):
        polished = _polish(Phi, y, eps, z) or polished
    if polished is not None:
        bound = max(bound, polished[1])
        if np.abs(polished[0]).sum() <= np.abs(z).sum():
            z = _restore_feasibility(Phi, y, polished[0], eps)
        converged = converged or _certified(z, bound)

    result = _result(Phi, y, cfg, z, bound, iterations, converged)
    logger.debug(
        "bpdn stop after %d iters: converged=%s objective=%.6e gap=%.3e slack=%.3e",
        iterations, converged, result.objective, result.duality_gap, result.constraint_slack,
    )
    return result
