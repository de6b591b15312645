"""Nakagami-m 信道功率采样：|ĝ|² ~ Gamma(m, scale Ω̂/m)"""
import math
from typing import Iterator, Optional, Tuple

import numpy as np

from EasyRSMA.common.errors import ConfigValidationError
from .rng import Purpose, substream

DEFAULT_BLOCK_SIZE = 2 ** 17


def standard_gamma(shape: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """
    Marsaglia-Tsang 拒绝采样，单一代码路径覆盖整数与非整数 m

    shape < 1 时先对 shape+1 采样，再乘 U^{1/shape}。
    """
    if not shape > 0.0:
        raise ConfigValidationError(f"gamma shape must be positive, got {shape}", keys=("m",))
    boost = shape < 1.0
    alpha = shape + 1.0 if boost else shape
    d = alpha - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)

    out = np.empty(size, dtype=float)
    filled = 0
    while filled < size:
        need = size - filled
        # 接受率 > 0.95
        n = int(need * 1.1) + 16
        x = rng.standard_normal(n)
        u = 1.0 - rng.random(n)
        y = 1.0 + c * x
        v = y * y * y
        positive = v > 0.0
        safe_v = np.where(positive, v, 1.0)
        accept = positive & (np.log(u) < 0.5 * x * x + d - d * safe_v + d * np.log(safe_v))
        accepted = d * v[accept]
        take = min(accepted.size, need)
        out[filled:filled + take] = accepted[:take]
        filled += take

    if boost:
        out *= (1.0 - rng.random(size)) ** (1.0 / shape)
    return out


def sample_channel_power(
    m: float,
    omega_hat: float,
    rng: np.random.Generator,
    size: Optional[int] = None,
):
    """|ĝ_n|² 的一次 (或 size 次) 抽样，均值 omega_hat"""
    if not omega_hat > 0.0:
        raise ConfigValidationError(f"omega_hat must be positive, got {omega_hat}", keys=("omega_hat",))
    if not m >= 0.5:
        raise ConfigValidationError(f"Nakagami shape must be >= 0.5, got {m}", keys=("m",))
    draws = standard_gamma(m, 1 if size is None else size, rng) * (omega_hat / m)
    return float(draws[0]) if size is None else draws


def block_sizes(n_samples: int, block_size: int = DEFAULT_BLOCK_SIZE) -> Iterator[Tuple[int, int]]:
    """(块号, 块内样本数)"""
    block = 0
    remaining = n_samples
    while remaining > 0:
        size = min(block_size, remaining)
        yield block, size
        remaining -= size
        block += 1


def channel_gain_blocks(
    m: float,
    seed: int,
    point_index: int,
    user: int,
    n_samples: int,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> Iterator[Tuple[int, np.ndarray]]:
    """
    按块产生单位均值的 Gamma(m, 1/m) 抽样，调用方再乘 Ω̂

    同一 (seed, point_index, user) 下，无论 Ω̂ 和方案如何，抽样都相同。
    """
    for block, size in block_sizes(n_samples, block_size):
        rng = substream(seed, point_index, user, block, Purpose.CHANNEL)
        yield block, standard_gamma(m, size, rng) / m
