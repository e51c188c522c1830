"""
부분행렬 스펙트럼 지표: RIC, ||A||^(s), 섭동 상수, 꼬리 지표

RIC 는 Gram 고유값 형태로 계산한다:
    delta_s = max_S max(lambda_max(A_S^T A_S) - 1, 1 - lambda_min(A_S^T A_S)),  0 이상으로 절단.
정확한 계산은 크기 s 인 모든 열 부분집합을 colex 순서로 훑고, 예산을 넘으면
무작위 부분집합에 대한 몬테카를로 하한만 제공한다.
"""

import logging
import math
from functools import lru_cache
from itertools import combinations
from typing import Optional, Tuple

import numpy as np

from app import settings
from app.errors import (
    BudgetExceededError,
    DegenerateSignalError,
    DimensionError,
    IllConditionedError,
)
from app.linalg import as_matrix, as_vector, spectral_norm
from app.seeding import make_rng
from schemas import PerturbationConstants, RicEstimate, RicMethod, TailMetrics

logger = logging.getLogger(__name__)

# 한 번에 고유값을 구할 부분집합 수
CHUNK = 8192


def _check_order(d: int, s: int) -> None:
    if not 1 <= s <= d:
        raise DimensionError(f"order s={s} must satisfy 1 <= s <= {d}")


def _check_budget(d: int, s: int, budget: int, hint: str) -> int:
    n_subsets = math.comb(d, s)
    if n_subsets > budget:
        raise BudgetExceededError(n_subsets, budget, hint)
    return n_subsets


@lru_cache(maxsize=32)
def colex_subsets(d: int, s: int) -> np.ndarray:
    """크기 s 인 {0..d-1} 부분집합 전체, colex 순서 (행마다 오름차순)"""
    combos = np.array(list(combinations(range(d), s)), dtype=np.intp).reshape(-1, s)
    # np.lexsort 는 마지막 키가 주 키: 가장 큰 원소부터 비교
    combos = combos[np.lexsort(combos.T)]
    combos.setflags(write=False)
    return combos


def random_subsets(d: int, s: int, samples: int, seed: int) -> np.ndarray:
    """균등 무작위 s-부분집합 samples 개 (행마다 오름차순)"""
    rng = make_rng(seed)
    out = np.empty((samples, s), dtype=np.intp)
    for start in range(0, samples, CHUNK):
        n = min(CHUNK, samples - start)
        keys = rng.random((n, d))
        picked = np.argpartition(keys, s - 1, axis=1)[:, :s]
        out[start:start + n] = np.sort(picked, axis=1)
    return out


def gram_eigen_extremes(A: np.ndarray, subsets: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """부분집합마다 A_S^T A_S 의 (최소, 최대) 고유값. 부분 Gram 은 A^T A 에서 잘라낸다."""
    M = A.T @ A
    lo = np.empty(len(subsets))
    hi = np.empty(len(subsets))
    for start in range(0, len(subsets), CHUNK):
        idx = subsets[start:start + CHUNK]
        gram = M[idx[:, :, None], idx[:, None, :]]
        w = np.linalg.eigvalsh(gram)
        lo[start:start + len(idx)] = w[:, 0]
        hi[start:start + len(idx)] = w[:, -1]
    return lo, hi


def _ric_from_extremes(lo: np.ndarray, hi: np.ndarray) -> float:
    return max(0.0, float(np.max(np.maximum(hi - 1.0, 1.0 - lo))))


def _max_norm(A: np.ndarray, subsets: np.ndarray) -> float:
    _, hi = gram_eigen_extremes(A, subsets)
    return math.sqrt(max(0.0, float(hi.max())))


# ---------------------------------------------------------------------------
# 희소 근사와 꼬리 지표
# ---------------------------------------------------------------------------

def best_s_term(x, s: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    크기 상위 s 개 성분만 남긴 x_s 와 그 지지집합.
    크기가 같으면 인덱스가 작은 쪽을 고른다.
    """
    x = np.asarray(x, dtype=float)
    _check_order(x.shape[0], s)
    order = np.argsort(-np.abs(x), kind="stable")
    support = np.sort(order[:s])
    xs = np.zeros_like(x)
    xs[support] = x[support]
    xs.setflags(write=False)
    support.setflags(write=False)
    return xs, support


def tail_metrics(x, s: int) -> TailMetrics:
    """alpha_s = ||x - x_s||_2 / ||x_s||_2,  beta_s = ||x - x_s||_1 / (sqrt(s) ||x_s||_2)"""
    x = as_vector(x)
    xs, _ = best_s_term(x, s)
    head = float(np.linalg.norm(xs))
    if head == 0.0:
        raise DegenerateSignalError("best s-term approximation is zero; tail metrics undefined")
    tail = x - xs
    return TailMetrics(
        s=s,
        alpha=float(np.linalg.norm(tail)) / head,
        beta=float(np.abs(tail).sum()) / (math.sqrt(s) * head),
    )


# ---------------------------------------------------------------------------
# RIC 와 부분행렬 노름
# ---------------------------------------------------------------------------

def ric_exact(A, s: int, budget: int = settings.DEFAULT_BUDGET) -> RicEstimate:
    A = as_matrix(A)
    d = A.shape[1]
    _check_order(d, s)
    n_subsets = _check_budget(d, s, budget, "use ric_monte_carlo for a lower bound")
    lo, hi = gram_eigen_extremes(A, colex_subsets(d, s))
    return RicEstimate(
        s=s,
        delta=_ric_from_extremes(lo, hi),
        method=RicMethod.exact,
        subsets_examined=n_subsets,
    )


def ric_monte_carlo(A, s: int, samples: int, seed: int) -> RicEstimate:
    A = as_matrix(A)
    d = A.shape[1]
    _check_order(d, s)
    if samples < 1:
        raise DimensionError("ric_monte_carlo needs at least one sample")
    lo, hi = gram_eigen_extremes(A, random_subsets(d, s, samples, seed))
    return RicEstimate(
        s=s,
        delta=_ric_from_extremes(lo, hi),
        method=RicMethod.monte_carlo_lower_bound,
        subsets_examined=samples,
    )


def ric_profile(A, s: int, budget: int, samples: int, seed: int) -> Tuple[RicEstimate, float]:
    """
    (delta_s, ||A||^(s)) 를 같은 부분집합 위 고유값 한 번으로.
    예산 안이면 정확한 값, 아니면 몬테카를로 하한 (둘 다).
    """
    A = as_matrix(A)
    d = A.shape[1]
    _check_order(d, s)
    n_subsets = math.comb(d, s)
    if n_subsets <= budget:
        subsets, method = colex_subsets(d, s), RicMethod.exact
    else:
        if samples < 1:
            raise DimensionError("ric_monte_carlo needs at least one sample")
        logger.info("delta_%d past budget %d, sampling %d subsets", s, budget, samples)
        subsets, method = random_subsets(d, s, samples, seed), RicMethod.monte_carlo_lower_bound
        n_subsets = samples
    lo, hi = gram_eigen_extremes(A, subsets)
    estimate = RicEstimate(
        s=s,
        delta=_ric_from_extremes(lo, hi),
        method=method,
        subsets_examined=n_subsets,
    )
    return estimate, math.sqrt(max(0.0, float(hi.max())))


def ric_auto(A, s: int, budget: int, samples: int, seed: int) -> RicEstimate:
    """예산 안이면 정확한 값, 아니면 몬테카를로 하한"""
    return ric_profile(A, s, budget, samples, seed)[0]


def submatrix_norm_max(A, s: int, budget: int = settings.DEFAULT_BUDGET) -> float:
    """||A||^(s): 모든 s-열 부분행렬의 스펙트럼 노름 중 최댓값"""
    A = as_matrix(A)
    d = A.shape[1]
    _check_order(d, s)
    _check_budget(d, s, budget, "lower d or s")
    return _max_norm(A, colex_subsets(d, s))


def submatrix_norm_monte_carlo(A, s: int, samples: int, seed: int) -> float:
    A = as_matrix(A)
    d = A.shape[1]
    _check_order(d, s)
    return _max_norm(A, random_subsets(d, s, samples, seed))


def perturbation_norms(
    A,
    Phi,
    s: int,
    budget: int = settings.DEFAULT_BUDGET,
    *,
    mc_samples: Optional[int] = None,
    seed: int = 0,
    full_norms: Optional[Tuple[float, float]] = None,
    norm_sub: Optional[float] = None,
) -> Tuple[float, float, float, float, RicMethod]:
    """
    (||A||_2, ||A-Phi||_2, ||A||^(s), ||A-Phi||^(s), method).

    예산을 넘는 order 는 mc_samples 가 주어졌을 때만 같은 무작위 부분집합 위에서
    A 와 A-Phi 의 노름 하한을 구한다. full_norms=(||A||_2, ||A-Phi||_2) 나
    norm_sub=||A||^(s) (같은 부분집합에서 이미 구한 값) 를 넘기면 그 계산을 건너뛴다.
    """
    A = as_matrix(A)
    Phi = as_matrix(Phi)
    if A.shape != Phi.shape:
        raise DimensionError(f"A {A.shape} and Phi {Phi.shape} differ in shape")
    d = A.shape[1]
    _check_order(d, s)

    E = A - Phi
    if full_norms is None:
        norm_full, abs_full = spectral_norm(A), spectral_norm(E)
    else:
        norm_full, abs_full = full_norms

    if math.comb(d, s) <= budget:
        subsets = colex_subsets(d, s)
        method = RicMethod.exact
    elif mc_samples:
        logger.info("||.||^(%d) past budget %d, sampling %d subsets", s, budget, mc_samples)
        subsets = random_subsets(d, s, mc_samples, seed)
        method = RicMethod.monte_carlo_lower_bound
    else:
        _check_budget(d, s, budget, "lower d or s, or pass mc_samples")

    if norm_sub is None:
        norm_sub = _max_norm(A, subsets)
    abs_sub = _max_norm(E, subsets) if E.any() else 0.0
    return norm_full, abs_full, norm_sub, abs_sub, method


def perturbation_constants(
    A,
    Phi,
    s: int,
    delta_s: RicEstimate,
    budget: int = settings.DEFAULT_BUDGET,
    *,
    mc_samples: Optional[int] = None,
    seed: int = 0,
    strict: bool = True,
    full_norms: Optional[Tuple[float, float]] = None,
    norm_sub: Optional[float] = None,
) -> PerturbationConstants:
    """
    eps_A, eps^(s)_A, ||A-Phi||_2, ||A-Phi||^(s), kappa^(s)_A, gamma_A.

    strict=False 이면 delta_s >= 1 일 때 kappa, gamma 를 None 으로 두고 나머지를 채운다.
    """
    if delta_s.delta >= 1.0 and strict:
        raise IllConditionedError(
            f"delta_{delta_s.s} = {delta_s.delta:.6g} >= 1; kappa and gamma are undefined"
        )
    norm_full, abs_full, norm_sub, abs_sub, method = perturbation_norms(
        A, Phi, s, budget, mc_samples=mc_samples, seed=seed, full_norms=full_norms, norm_sub=norm_sub,
    )
    if norm_full == 0.0 or norm_sub == 0.0:
        raise IllConditionedError("encoder A has zero norm")

    kappa = gamma = None
    if delta_s.delta < 1.0:
        kappa = math.sqrt(1.0 + delta_s.delta) / math.sqrt(1.0 - delta_s.delta)
        gamma = norm_full / math.sqrt(1.0 - delta_s.delta)

    return PerturbationConstants(
        s=s,
        eps_full=abs_full / norm_full,
        eps_sub=abs_sub / norm_sub,
        abs_full=abs_full,
        abs_sub=abs_sub,
        norm_full=norm_full,
        norm_sub=norm_sub,
        kappa=kappa,
        gamma=gamma,
        method=method,
    )
