from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, root_validator, validator

UINT64_MAX = 2 ** 64 - 1


class FrozenModel(BaseModel):
    class Config:
        allow_mutation = False
        arbitrary_types_allowed = True


# ---------------------------------------------------------------------------
# 생성 스펙 (ensembles)
# ---------------------------------------------------------------------------

class EnsembleKind(str, Enum):
    gaussian = "gaussian"
    bernoulli = "bernoulli"


class EnsembleSpec(FrozenModel):
    kind: EnsembleKind = EnsembleKind.gaussian
    m: int = Field(..., ge=1)
    d: int = Field(..., ge=1)
    seed: int = Field(0, ge=0, le=UINT64_MAX)


class SignalSpec(FrozenModel):
    d: int = Field(..., ge=1)
    s: int = Field(..., ge=1)
    tail_alpha: float = Field(0.0, ge=0)
    tail_beta: float = Field(0.0, ge=0)
    seed: int = Field(0, ge=0, le=UINT64_MAX)

    @root_validator(skip_on_failure=True)
    def check_sparsity(cls, values):
        if values["s"] > values["d"]:
            raise ValueError(f"sparsity s={values['s']} exceeds length d={values['d']}")
        return values


class PerturbationSpec(FrozenModel):
    target: float = Field(..., ge=0, lt=1, description="원하는 상대 섭동 eps^(s)_A")
    s: int = Field(..., ge=1)
    seed: int = Field(0, ge=0, le=UINT64_MAX)


# ---------------------------------------------------------------------------
# 스펙트럼 지표 (spectral-metrics)
# ---------------------------------------------------------------------------

class RicMethod(str, Enum):
    exact = "exact"
    monte_carlo_lower_bound = "monte_carlo_lower_bound"


class RicEstimate(FrozenModel):
    s: int = Field(..., ge=1)
    delta: float = Field(..., ge=0)
    method: RicMethod
    subsets_examined: int = Field(..., ge=1)


class PerturbationConstants(FrozenModel):
    s: int = Field(..., ge=1)
    eps_full: float = Field(..., ge=0, description="||A-Phi||_2 / ||A||_2")
    eps_sub: float = Field(..., ge=0, description="||A-Phi||^(s) / ||A||^(s)")
    abs_full: float = Field(..., ge=0, description="||A-Phi||_2")
    abs_sub: float = Field(..., ge=0, description="||A-Phi||^(s)")
    norm_full: float = Field(..., ge=0, description="||A||_2")
    norm_sub: float = Field(..., ge=0, description="||A||^(s)")
    # delta_s >= 1 이면 정의되지 않음 (None)
    kappa: Optional[float] = Field(None, ge=1)
    gamma: Optional[float] = Field(None, ge=0)
    method: RicMethod = RicMethod.exact


class TailMetrics(FrozenModel):
    s: int = Field(..., ge=1)
    alpha: float = Field(..., ge=0)
    beta: float = Field(..., ge=0)


# ---------------------------------------------------------------------------
# 복원 알고리즘 (cosamp, bpdn)
# ---------------------------------------------------------------------------

class CosampConfig(FrozenModel):
    s: int = Field(..., ge=1)
    max_iters: int = Field(100, ge=1)
    residual_tol: float = Field(1e-10, gt=0)
    stagnation_tol: float = Field(1e-7, gt=0)


class StopReason(str, Enum):
    residual = "residual"
    stagnation = "stagnation"
    max_iters = "max_iters"


class RecoveryResult(FrozenModel):
    estimate: np.ndarray
    iterations: int
    residual_history: List[float]
    converged: bool
    stop_reason: StopReason


class BpdnConfig(FrozenModel):
    epsilon: float = Field(..., ge=0)
    max_iters: int = Field(50000, ge=1)
    primal_tol: float = Field(1e-9, gt=0)
    dual_tol: float = Field(1e-9, gt=0)


class BpdnResult(FrozenModel):
    solution: np.ndarray
    objective: float
    constraint_slack: float
    iterations: int
    converged: bool
    dual_bound: float
    duality_gap: float


# ---------------------------------------------------------------------------
# 이론 (theory)
# ---------------------------------------------------------------------------

class ConditionReport(FrozenModel):
    """margin 은 (좌변 - 우변). None 은 평가하지 않았거나 정의되지 않음."""

    bp_ric_ok: Optional[bool] = None
    bp_ric_margin: Optional[float] = None
    bp_tail_ok: Optional[bool] = None
    bp_tail_margin: Optional[float] = None
    cosamp_ric_ok: Optional[bool] = None
    cosamp_ric_margin: Optional[float] = None
    cosamp_tail_ok: Optional[bool] = None
    cosamp_tail_margin: Optional[float] = None
    # A 의 RIC 와 eps^(4s) 로 얻은 Phi 의 delta_4s 상한
    decoder_ric_bound: Optional[float] = None

    def merge(self, other: "ConditionReport") -> "ConditionReport":
        values = self.dict()
        values.update({k: v for k, v in other.dict().items() if v is not None})
        return ConditionReport(**values)

    @property
    def bp_ok(self) -> bool:
        return bool(self.bp_ric_ok) and bool(self.bp_tail_ok)

    @property
    def cosamp_ok(self) -> bool:
        return bool(self.cosamp_ric_ok) and bool(self.cosamp_tail_ok)


class BoundBracket(FrozenModel):
    s: int
    tail_l2: float = Field(..., ge=0, description="||x - x_s||_2")
    tail_l1: float = Field(..., ge=0, description="||x - x_s||_1 / sqrt(s)")
    multiplicative: float = Field(..., ge=0, description="(eps alpha_s + eps^(s)) ||b||_2, 절대 노름")
    noise: float = Field(..., ge=0, description="||e||_2")
    multiplicative_relative: float = Field(..., ge=0)
    bp_noise_term: Optional[float] = Field(None, ge=0, description="eps_{A,s,b}")
    c0: Optional[float] = None
    c1: Optional[float] = None
    c: Optional[float] = None

    @property
    def bp_tail_term(self) -> float:
        return self.tail_l1

    @property
    def cosamp_terms(self) -> Tuple[float, float, float, float]:
        return (self.tail_l2, self.tail_l1, self.multiplicative, self.noise)

    @property
    def cosamp_total(self) -> float:
        return sum(self.cosamp_terms)

    @property
    def cosamp_total_relative(self) -> float:
        return self.tail_l2 + self.tail_l1 + self.multiplicative_relative + self.noise


# ---------------------------------------------------------------------------
# 실험 하네스 (harness-cli)
# ---------------------------------------------------------------------------

class Algorithm(str, Enum):
    cosamp = "cosamp"
    bpdn = "bpdn"


class ExperimentConfig(FrozenModel):
    ensemble: EnsembleSpec
    signal: SignalSpec
    eps_grid: List[float]
    noise_grid: List[float]
    trials_per_cell: int = Field(..., ge=1)
    algorithms: List[Algorithm] = [Algorithm.cosamp, Algorithm.bpdn]
    master_seed: int = Field(0, ge=0, le=UINT64_MAX)
    budget: int = Field(200000, ge=1)
    mc_samples: int = Field(2000, ge=1)
    cosamp_max_iters: int = Field(100, ge=1)
    bpdn_max_iters: int = Field(50000, ge=1)

    @validator("eps_grid")
    def check_eps_grid(cls, v):
        if not v:
            raise ValueError("eps_grid must not be empty")
        if any(t < 0 or t >= 1 for t in v):
            raise ValueError("eps_grid targets must lie in [0, 1)")
        return v

    @validator("noise_grid")
    def check_noise_grid(cls, v):
        if not v:
            raise ValueError("noise_grid must not be empty")
        if any(level < 0 for level in v):
            raise ValueError("noise levels must be >= 0")
        return v

    @validator("algorithms")
    def check_algorithms(cls, v):
        if not v:
            raise ValueError("at least one algorithm is required")
        return v

    @root_validator(skip_on_failure=True)
    def check_orders(cls, values):
        ens, sig = values["ensemble"], values["signal"]
        if ens.d != sig.d:
            raise ValueError(f"ensemble d={ens.d} and signal d={sig.d} differ")
        if 4 * sig.s > ens.d:
            raise ValueError(f"4s={4 * sig.s} exceeds d={ens.d}")
        return values

    @property
    def s(self) -> int:
        return self.signal.s

    @property
    def cells(self) -> List[Tuple[float, float]]:
        return [(eps, noise) for eps in self.eps_grid for noise in self.noise_grid]

    @property
    def n_trials(self) -> int:
        return len(self.cells) * self.trials_per_cell


CSV_COLUMNS = [
    "trial_id", "seed", "eps_target", "noise_level",
    "eps_sub_rel", "eps_full_rel", "abs_sub", "abs_full",
    "delta_s", "delta_2s", "delta_4s", "ric_method",
    "alpha_s", "beta_s",
    "cond_bp_ric", "cond_bp_tail", "cond_cs_ric", "cond_cs_tail",
    "err_cosamp", "err_bpdn", "bracket_cosamp", "eps_total_bp",
    "iters_cosamp", "iters_bpdn", "conv_cosamp", "conv_bpdn",
]


class TrialRecord(BaseModel):
    trial_id: int
    seed: int
    eps_target: float
    noise_level: float
    eps_sub_rel: float
    eps_full_rel: float
    abs_sub: float
    abs_full: float
    delta_s: float
    delta_2s: float
    delta_4s: float
    ric_method: str
    alpha_s: float
    beta_s: float
    cond_bp_ric: bool
    cond_bp_tail: bool
    cond_cs_ric: bool
    cond_cs_tail: bool
    err_cosamp: Optional[float] = None
    err_bpdn: Optional[float] = None
    bracket_cosamp: float
    eps_total_bp: Optional[float] = None
    iters_cosamp: Optional[int] = None
    iters_bpdn: Optional[int] = None
    conv_cosamp: Optional[bool] = None
    conv_bpdn: Optional[bool] = None
    # CSV 에는 없고 적합/요약에만 쓰는 값
    margin_bp_ric: Optional[float] = None
    margin_bp_tail: Optional[float] = None
    margin_cs_ric: Optional[float] = None
    margin_cs_tail: Optional[float] = None
    bracket_cosamp_rel: Optional[float] = None
    bp_tail_term: Optional[float] = None
    # BPDN 에 실제로 넘긴 반지름: eps_{A,s,b}, 정의되지 않으면 ||y - Phi x||_2
    bp_radius: Optional[float] = None

    class Config:
        orm_mode = True

    @property
    def is_train(self) -> bool:
        return self.trial_id % 2 == 0


class BracketFit(FrozenModel):
    constant: Optional[float] = Field(None, ge=0)
    c0: Optional[float] = Field(None, ge=0)
    c1: Optional[float] = Field(None, ge=0)
    train_count: int = 0
    test_count: int = 0
    coverage: Optional[float] = Field(None, ge=0, le=1)
    residual_max: Optional[float] = None


class AlgorithmFit(FrozenModel):
    algorithm: Algorithm
    gated: BracketFit
    ungated: BracketFit
    gated_relative: Optional[BracketFit] = None
    ungated_relative: Optional[BracketFit] = None
    exact_recovery_trials: int = 0
    exact_recovery_ok: int = 0


class FitReport(FrozenModel):
    trial_count: int
    fits: List[AlgorithmFit]

    def for_algorithm(self, algorithm: Algorithm) -> Optional[AlgorithmFit]:
        return next((f for f in self.fits if f.algorithm == algorithm), None)


class ProblemInstance(FrozenModel):
    A: np.ndarray
    Phi: np.ndarray
    x: np.ndarray
    e: np.ndarray
    s: int
    # 생성 중 구한 A 의 order-s 값: delta_s 와 ||A||^(s)
    ric_s: Optional[RicEstimate] = None
    norm_sub: Optional[float] = None

    @property
    def b(self) -> np.ndarray:
        return self.A @ self.x

    @property
    def y(self) -> np.ndarray:
        return self.b + self.e


class ScalingRow(FrozenModel):
    scale: float
    err_abs: float
    err_rel: float
    signal_norm: float
