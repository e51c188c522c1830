from typing import Optional


class CSRecoveryError(Exception):
    """도메인 오류의 기본 클래스 (detail + exit_code)"""

    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail

    def with_context(self, context: str) -> "CSRecoveryError":
        # 하네스에서 셀 좌표를 앞에 붙여 다시 던질 때 사용
        self.detail = f"{context}: {self.detail}"
        self.args = (self.detail,)
        return self


class DimensionError(CSRecoveryError):
    pass


class BudgetExceededError(CSRecoveryError):
    def __init__(self, n_subsets: int, budget: int, hint: str = "lower d or s"):
        super().__init__(
            f"{n_subsets} subsets exceed the combinatorial budget {budget}; {hint}"
        )
        self.n_subsets = n_subsets
        self.budget = budget


class InfeasibleSpecError(CSRecoveryError):
    pass


class DegenerateSignalError(CSRecoveryError):
    pass


class IllConditionedError(CSRecoveryError):
    pass


class ConditionViolationError(CSRecoveryError):
    pass


class NumericalError(CSRecoveryError):
    def __init__(self, detail: str, iteration: Optional[int] = None):
        if iteration is not None:
            detail = f"iteration {iteration}: {detail}"
        super().__init__(detail)
        self.iteration = iteration
