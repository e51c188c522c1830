"""
실수 밀집 행렬 커널: 최소제곱, 특이값, 스펙트럼 노름, 열 부분행렬

행렬은 numpy 배열로 다루며, 공개 함수가 돌려주는 배열은 모두 읽기 전용이다.
"""

import logging
import math
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import solve_triangular

from app.errors import DimensionError, NumericalError

logger = logging.getLogger(__name__)

# sigma_min / sigma_max 가 이 값보다 작으면 0으로 취급
RANK_RTOL = 1e-12

# 한쪽 Jacobi: 열 쌍의 상대 내적이 이 값 이하이면 직교로 간주
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 60


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def as_matrix(a) -> np.ndarray:
    """2차원 실수 행렬로 검증/복사 (읽기 전용)"""
    arr = np.array(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"expected a nonempty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError("matrix has non-finite entries")
    return _frozen(arr)


def as_vector(v) -> np.ndarray:
    arr = np.array(v, dtype=float)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise DimensionError(f"expected a nonempty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError("vector has non-finite entries")
    return _frozen(arr)


def as_index_set(indices, dim: int) -> np.ndarray:
    """엄격히 증가하는 열 인덱스 집합으로 검증"""
    idx = np.asarray(indices, dtype=np.intp).reshape(-1)
    if idx.size and (idx[0] < 0 or idx[-1] >= dim):
        raise DimensionError(f"index set {idx.tolist()} out of range for dimension {dim}")
    if idx.size > 1 and np.any(np.diff(idx) <= 0):
        raise DimensionError(f"index set {idx.tolist()} is not strictly increasing")
    return _frozen(idx.copy())


def submatrix(A: np.ndarray, S) -> np.ndarray:
    """A 의 열 S 만 모은 rows x |S| 행렬"""
    S = as_index_set(S, A.shape[1])
    return _frozen(np.array(A[:, S], dtype=float))


def _householder_reduce(A: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # Householder 반사로 A 를 R 로, y 를 Q^T y 로 동시에 변환
    m, n = A.shape
    R = np.array(A, dtype=float)
    qty = np.array(y, dtype=float)
    for k in range(n):
        x = R[k:, k]
        normx = np.linalg.norm(x)
        if normx == 0.0:
            continue
        v = x.copy()
        v[0] += math.copysign(normx, x[0])
        v /= np.linalg.norm(v)
        R[k:, k:] -= 2.0 * np.outer(v, v @ R[k:, k:])
        qty[k:] -= 2.0 * v * (v @ qty[k:])
    return np.triu(R[:n, :n]), qty[:n]


@lru_cache(maxsize=64)
def _round_robin(n: int) -> Tuple[Tuple[np.ndarray, np.ndarray], ...]:
    # 원형(토너먼트) 순서: 한 라운드의 열 쌍은 서로 겹치지 않아 한꺼번에 회전할 수 있다
    players = list(range(n + (n % 2)))
    half = len(players) // 2
    rounds = []
    for _ in range(len(players) - 1):
        pairs = [(players[i], players[-1 - i]) for i in range(half)]
        pairs = [(min(p), max(p)) for p in pairs if max(p) < n]
        if pairs:
            rounds.append((np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def jacobi_svd(A: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    한쪽(Hestenes) Jacobi 특이값 분해. A = U diag(sigma) V^T (thin),
    sigma 는 내림차순. sigma 가 0 인 열의 U 는 0 벡터로 남는다.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    if m < n:
        U, sigma, V = jacobi_svd(A.T)
        return V, sigma, U

    W = A.copy()
    V = np.eye(n)
    rounds = _round_robin(n)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        for sweep in range(JACOBI_MAX_SWEEPS):
            rotated = False
            for I, J in rounds:
                Wi = W[:, I]
                Wj = W[:, J]
                alpha = np.einsum("ij,ij->j", Wi, Wi)
                beta = np.einsum("ij,ij->j", Wj, Wj)
                gamma = np.einsum("ij,ij->j", Wi, Wj)
                active = (gamma != 0.0) & (np.abs(gamma) > JACOBI_TOL * np.sqrt(alpha * beta))
                if not active.any():
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * np.where(active, gamma, 1.0))
                t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                t = np.where(active & np.isfinite(t), t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                W[:, I] = c * Wi - s * Wj
                W[:, J] = s * Wi + c * Wj
                Vi = V[:, I]
                Vj = V[:, J]
                V[:, I] = c * Vi - s * Vj
                V[:, J] = s * Vi + c * Vj
            if not rotated:
                break
        else:
            logger.debug("jacobi_svd hit %d sweeps on a %dx%d matrix", JACOBI_MAX_SWEEPS, m, n)

    sigma = np.linalg.norm(W, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    W = W[:, order]
    V = V[:, order]
    U = np.zeros_like(W)
    nonzero = sigma > 0.0
    U[:, nonzero] = W[:, nonzero] / sigma[nonzero]
    return U, sigma, V


def singular_values(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        raise DimensionError("singular values of an empty matrix")
    return _frozen(jacobi_svd(A)[1])


def spectral_norm(A: np.ndarray) -> float:
    return float(singular_values(A)[0])


def extreme_singular_values(A: np.ndarray) -> Tuple[float, float]:
    """
    (sigma_min, sigma_max). 가로로 긴 행렬(rows < cols)은 Gram 행렬 A^T A 가
    특이하므로 sigma_min = 0 으로 보고한다.
    """
    sigma = singular_values(A)
    rows, cols = np.shape(A)
    smin = float(sigma[-1]) if rows >= cols else 0.0
    return smin, float(sigma[0])


def _min_norm_solve(A: np.ndarray, y: np.ndarray) -> np.ndarray:
    U, sigma, V = jacobi_svd(A)
    if sigma[0] == 0.0:
        return np.zeros(A.shape[1])
    keep = sigma > RANK_RTOL * sigma[0]
    return V[:, keep] @ ((U[:, keep].T @ y) / sigma[keep])


def least_squares(A: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    min ||Az - y||_2 의 해. 완전 열 계수이면 Householder QR, 계수 부족이면
    최소 노름 해 (pseudo-inverse). 열이 없으면 빈 벡터.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    if A.ndim != 2 or y.ndim != 1 or A.shape[0] != y.shape[0]:
        raise DimensionError(
            f"least squares needs A.rows == len(y), got {A.shape} and {y.shape}"
        )
    m, n = A.shape
    if n == 0:
        return _frozen(np.zeros(0))
    z = None
    if m >= n:
        R, qty = _householder_reduce(A, y)
        diag = np.abs(np.diag(R))
        if diag.min() > RANK_RTOL * diag.max():
            z = solve_triangular(R, qty, lower=False)
    if z is None:
        z = _min_norm_solve(A, y)
    if not np.all(np.isfinite(z)):
        raise NumericalError("least squares produced non-finite values")
    return _frozen(np.asarray(z, dtype=float))


def normal_solve_pair(A: np.ndarray, y: np.ndarray, c: np.ndarray) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """
    QR 한 번으로 (A^+ y, (A^T A)^{-1} c). A 가 완전 열 계수가 아니면 None.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    if n == 0 or m < n:
        return None
    R, qty = _householder_reduce(A, np.asarray(y, dtype=float))
    diag = np.abs(np.diag(R))
    if diag.min() <= RANK_RTOL * diag.max():
        return None
    z = solve_triangular(R, qty, lower=False)
    g = solve_triangular(R, solve_triangular(R, np.asarray(c, dtype=float), trans="T", lower=False), lower=False)
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(g))):
        return None
    return _frozen(z), _frozen(g)
