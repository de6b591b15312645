"""
计数器式随机流拆分

每个 (扫描点, 用户, 块, 用途) 从主种子派生独立子流，结果与调度顺序无关：

    seed
      └── (point_index, user, block, purpose)
            ├── CHANNEL     信道功率 |ĝ|²，两种流、两种模式、RSMA/NOMA 共用
            └── FULL_MODEL  相位、估计误差、符号、失真、AWGN
"""
from enum import IntEnum

import numpy as np

from EasyRSMA.common.errors import ConfigValidationError

MAX_SEED = 2 ** 64


class Purpose(IntEnum):
    CHANNEL = 0
    FULL_MODEL = 1


def check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= int(seed) < MAX_SEED:
        raise ConfigValidationError(f"seed must be a 64-bit unsigned integer, got {seed!r}", keys=("seed",))
    return int(seed)


def substream(seed: int, point_index: int, user: int, block: int, purpose: Purpose) -> np.random.Generator:
    """派生一个 Philox 子流"""
    ss = np.random.SeedSequence(
        entropy=check_seed(seed),
        spawn_key=(int(point_index), int(user), int(block), int(purpose)),
    )
    return np.random.Generator(np.random.Philox(ss))
