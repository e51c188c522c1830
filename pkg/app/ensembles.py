"""
시드 고정 생성기: 측정 행렬, (거의) 희소 신호, 가산 잡음, 디코더 섭동
"""

import logging
import math
from typing import Optional

import numpy as np

from app import settings
from app.errors import DimensionError, InfeasibleSpecError
from app.linalg import as_matrix, as_vector
from app.metrics import submatrix_norm_max
from app.seeding import make_rng
from schemas import EnsembleKind, EnsembleSpec, PerturbationSpec, SignalSpec

logger = logging.getLogger(__name__)

# head 재추첨 횟수 상한
MAX_HEAD_DRAWS = 1000

# 꼬리 조건 경계에서의 반올림 허용치
_BOUND_RTOL = 1e-12


def gen_matrix(spec: EnsembleSpec) -> np.ndarray:
    """gaussian: N(0, 1/m),  bernoulli: +-1/sqrt(m) 등확률"""
    rng = make_rng(spec.seed)
    scale = 1.0 / math.sqrt(spec.m)
    if spec.kind == EnsembleKind.gaussian:
        A = rng.standard_normal((spec.m, spec.d)) * scale
    else:
        A = np.where(rng.integers(0, 2, size=(spec.m, spec.d)) == 1, scale, -scale)
    return as_matrix(A)


def _check_tail(spec: SignalSpec) -> None:
    alpha, beta, s, d = spec.tail_alpha, spec.tail_beta, spec.s, spec.d
    n = d - s
    l2, l1 = alpha, beta * math.sqrt(s)
    if alpha == 0.0 and beta == 0.0:
        return
    if n == 0:
        raise InfeasibleSpecError(f"s = d = {d} leaves no tail for alpha={alpha}, beta={beta}")
    if alpha == 0.0 or beta == 0.0:
        raise InfeasibleSpecError(
            f"alpha_s and beta_s must vanish together, got alpha={alpha}, beta={beta}"
        )
    if l1 > l2 * math.sqrt(n) * (1 + _BOUND_RTOL):
        raise InfeasibleSpecError(
            f"Cauchy-Schwarz bound violated: beta_s={beta} > alpha_s*sqrt(d-s)/sqrt(s)"
            f" = {alpha * math.sqrt(n) / math.sqrt(s):.6g}"
        )
    if l1 < l2 * (1 - _BOUND_RTOL):
        raise InfeasibleSpecError(
            f"l1 >= l2 bound violated: beta_s*sqrt(s)={l1:.6g} < alpha_s={alpha}"
        )


def _tail_magnitudes(l2: float, l1: float, n: int) -> np.ndarray:
    """
    spike 하나(p) + 균일 성분 n-1 개(q) 로 ||t||_2 = l2, ||t||_1 = l1 을 맞춘다.
    p^2 + (n-1) q^2 = l2^2,  p + (n-1) q = l1,  큰 근을 p 로 택한다.
    """
    if l2 == 0.0 or n == 0:
        return np.zeros(n)
    k = n - 1
    if k == 0:
        return np.array([l2])
    l1 = min(max(l1, l2), l2 * math.sqrt(n))
    disc = max(0.0, k * (n * l2 * l2 - l1 * l1))
    p = (l1 + math.sqrt(disc)) / n
    q = max(0.0, (l1 - p) / k)
    return np.concatenate(([p], np.full(k, q)))


def gen_signal(spec: SignalSpec) -> np.ndarray:
    """
    x_s 는 무작위 지지집합 위 단위 노름, 나머지 전체가 꼬리.
    꼬리 크기는 head 의 가장 작은 성분을 넘지 않게 head 를 다시 뽑는다.
    """
    _check_tail(spec)
    d, s = spec.d, spec.s
    n = d - s
    rng = make_rng(spec.seed)
    support = np.sort(rng.permutation(d)[:s])
    tail = _tail_magnitudes(spec.tail_alpha, spec.tail_beta * math.sqrt(s), n)
    largest_tail = float(tail.max()) if n else 0.0

    for _ in range(MAX_HEAD_DRAWS):
        head = rng.standard_normal(s)
        norm = np.linalg.norm(head)
        if norm == 0.0:
            continue
        head /= norm
        if largest_tail <= np.abs(head).min():
            break
    else:
        raise InfeasibleSpecError(
            f"tail entry {largest_tail:.6g} keeps exceeding the smallest head entry;"
            " lower alpha_s or s"
        )

    x = np.zeros(d)
    x[support] = head
    if n:
        complement = np.setdiff1d(np.arange(d), support)
        signs = np.where(rng.integers(0, 2, size=n) == 1, 1.0, -1.0)
        x[complement[rng.permutation(n)]] = signs * tail
    return as_vector(x)


def gen_perturbed_decoder(
    A,
    spec: PerturbationSpec,
    budget: int = settings.DEFAULT_BUDGET,
    norm_sub: Optional[float] = None,
) -> np.ndarray:
    """
    Phi = A - E, E 는 가우시안 방향을 ||E||^(s) / ||A||^(s) = target 이 되게 재조정.
    norm_sub 는 이미 구한 ||A||^(s).
    """
    A = as_matrix(A)
    if spec.s > A.shape[1]:
        raise DimensionError(f"perturbation order s={spec.s} exceeds d={A.shape[1]}")
    if spec.target == 0.0:
        return A
    norm_A = submatrix_norm_max(A, spec.s, budget) if norm_sub is None else norm_sub
    G = make_rng(spec.seed).standard_normal(A.shape)
    norm_G = submatrix_norm_max(G, spec.s, budget)
    E = G * (spec.target * norm_A / norm_G)
    return as_matrix(A - E)


def gen_noise(m: int, level: float, seed: int) -> np.ndarray:
    """가우시안 방향, ||e||_2 = level"""
    if level < 0:
        raise InfeasibleSpecError(f"noise level must be >= 0, got {level}")
    if m < 1:
        raise DimensionError(f"noise length must be >= 1, got {m}")
    if level == 0.0:
        return as_vector(np.zeros(m))
    g = make_rng(seed).standard_normal(m)
    return as_vector(g * (level / np.linalg.norm(g)))
