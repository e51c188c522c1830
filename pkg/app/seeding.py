"""
재현 가능한 난수 스트림

모든 생성기는 Philox (카운터 기반 64비트) 위에서 돈다. 시행별 스트림은
SeedSequence((master_seed, trial_id, ...)) 로 유도하므로 실행 순서나 워커 수와
무관하게 같은 값이 나온다.
"""

import numpy as np

# 시행 안에서 쓰는 하위 스트림 번호
STREAM_MATRIX = 0
STREAM_SIGNAL = 1
STREAM_PERTURBATION = 2
STREAM_NOISE = 3
STREAM_RIC = 4


def derive_seed(*path: int) -> int:
    """정수 경로 (master_seed, trial_id, stream, ...) 에서 64비트 시드를 유도"""
    state = np.random.SeedSequence([int(p) for p in path]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
