import os
from dotenv import load_dotenv

# 환경 변수 로드
load_dotenv()

# 조합 예산 (부분집합 개수 상한)
DEFAULT_BUDGET = int(os.getenv("CSR_BUDGET", "200000"))

# 예산 초과 시 몬테카를로 표본 수
DEFAULT_MC_SAMPLES = int(os.getenv("CSR_MC_SAMPLES", "2000"))

DEFAULT_WORKERS = int(os.getenv("CSR_WORKERS", "1"))

LOG_LEVEL = os.getenv("CSR_LOG_LEVEL", "WARNING")
