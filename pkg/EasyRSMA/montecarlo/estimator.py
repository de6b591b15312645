"""
Monte-Carlo 速率估计 (基于 SINR 公式)

exact_log 模式估计 E[log2(1+γ)]，topsoe_approx 模式估计 E[2γ/((2+γ)ln2)]，
两种模式来自同一批信道抽样，因此逐点满足 topsoe_approx ≤ exact_log。
"""
import logging
import math
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from EasyRSMA.analytic.rate_kernel import exact_rate, topsoe_rate
from EasyRSMA.common.errors import ConfigValidationError
from EasyRSMA.system_model import LinkStats, Stream, SystemConfig, derive_link_stats, instantaneous_sinr
from EasyRSMA.system_model.link_stats import check_user
from .rng import check_seed
from .sampler import DEFAULT_BLOCK_SIZE, channel_gain_blocks

logger = logging.getLogger(__name__)

MIN_SAMPLES = 1000


class McMode(StrEnum):
    EXACT_LOG = "exact_log"
    TOPSOE_APPROX = "topsoe_approx"


RATE_MAPS = {
    McMode.EXACT_LOG: exact_rate,
    McMode.TOPSOE_APPROX: topsoe_rate,
}


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n_samples: int
    mode: McMode
    seed: int
    degenerate: bool = False
    mean_sinr: Optional[float] = None


@dataclass
class RunningMoments:
    """流式均值/方差，块之间按 Chan 公式合并"""
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def update(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return
        block_mean = float(np.mean(values))
        block_m2 = float(np.sum((values - block_mean) ** 2))
        self.merge(RunningMoments(int(values.size), block_mean, block_m2))

    def merge(self, other: "RunningMoments") -> None:
        if other.count == 0:
            return
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean, other.m2
            return
        total = self.count + other.count
        delta = other.mean - self.mean
        self.mean += delta * other.count / total
        self.m2 += other.m2 + delta * delta * self.count * other.count / total
        self.count = total

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count > 0 else 0.0


@dataclass
class BatchMeans:
    """
    批均值法：每次 update 记为一批，标准误取批均值的加权离散度

    批内样本共享同一组估计量 (例如全模型中按批估计的干扰功率) 时，
    逐样本方差会漏掉这部分波动，批均值不会。
    """
    sizes: List[int] = field(default_factory=list)
    means: List[float] = field(default_factory=list)

    def update(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return
        self.sizes.append(int(values.size))
        self.means.append(float(np.mean(values)))

    @property
    def count(self) -> int:
        return sum(self.sizes)

    @property
    def mean(self) -> float:
        if not self.sizes:
            return 0.0
        return float(np.average(self.means, weights=self.sizes))

    @property
    def stderr(self) -> float:
        k = len(self.sizes)
        if k < 2:
            return 0.0
        weights = np.asarray(self.sizes, dtype=float) / self.count
        deviations = np.asarray(self.means) - self.mean
        return math.sqrt(k / (k - 1) * float(np.sum(weights ** 2 * deviations ** 2)))


Moments = Union[RunningMoments, BatchMeans]


def batch_slices(size: int, batch_size: Optional[int]) -> List[slice]:
    """把一个块切成长度在 [batch_size, 2·batch_size) 内的批；None 表示整块一批"""
    if batch_size is None or size <= batch_size:
        return [slice(0, size)]
    parts = size // int(batch_size)
    edges = [i * size // parts for i in range(parts + 1)]
    return [slice(lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]


@dataclass
class StreamAccumulator:
    """单个流在两种模式下的速率矩，以及 SINR 均值"""
    moments: Callable[[], Moments] = RunningMoments
    rates: Dict[McMode, Moments] = field(init=False)
    sinr: RunningMoments = field(default_factory=RunningMoments)

    def __post_init__(self):
        self.rates = {mode: self.moments() for mode in McMode}

    def add(self, sinr_values: np.ndarray) -> Dict[McMode, np.ndarray]:
        per_mode = {}
        for mode, rate_map in RATE_MAPS.items():
            per_mode[mode] = rate_map(sinr_values)
            self.rates[mode].update(per_mode[mode])
        self.sinr.update(sinr_values)
        return per_mode


@dataclass
class UserRateAccumulation:
    """mc_user_rate 一次遍历的全部中间量"""
    target: int
    moments: Callable[[], Moments] = RunningMoments
    common: Dict[int, StreamAccumulator] = field(default_factory=dict)
    private: StreamAccumulator = field(init=False)
    total: Dict[McMode, Moments] = field(init=False)
    degenerate: bool = False

    def __post_init__(self):
        self.private = StreamAccumulator(self.moments)
        self.total = {mode: self.moments() for mode in McMode}

    def estimate(self, mode: McMode, n_samples: int, seed: int) -> McEstimate:
        """
        min_n 公共流估计 + 目标用户私有流估计

        argmin 用户就是目标用户时，直接用逐样本总速率的标准误；
        否则两者来自独立子流，标准误按平方和合并。
        """
        mode = McMode(mode)
        means = {n: acc.rates[mode].mean for n, acc in self.common.items()}
        argmin = min(means, key=lambda n: (means[n], n))
        private = self.private.rates[mode]
        if argmin == self.target:
            stderr = self.total[mode].stderr
        else:
            stderr = math.hypot(self.common[argmin].rates[mode].stderr, private.stderr)
        return McEstimate(
            mean=means[argmin] + private.mean,
            stderr=stderr,
            n_samples=n_samples,
            mode=mode,
            seed=seed,
            degenerate=self.degenerate,
            mean_sinr=max(self.common[argmin].sinr.mean, self.private.sinr.mean),
        )


# (user, stats, block, |ĝ|²) -> (γ_common, γ_private 或 None)
BlockSinrFn = Callable[[int, LinkStats, int, np.ndarray, bool], Tuple[np.ndarray, Optional[np.ndarray]]]


def check_samples(n_samples: int) -> int:
    if isinstance(n_samples, bool) or not isinstance(n_samples, (int, np.integer)) or n_samples < MIN_SAMPLES:
        raise ConfigValidationError(f"n_samples must be an integer >= {MIN_SAMPLES}, got {n_samples!r}", keys=("n_samples",))
    return int(n_samples)


def accumulate_user_rates(
    config: SystemConfig,
    user: int,
    tx_power_dbm: float,
    n_samples: int,
    seed: int,
    point_index: int,
    block_size: int,
    block_sinrs: BlockSinrFn,
    moments: Callable[[], Moments] = RunningMoments,
    batch_size: Optional[int] = None,
) -> UserRateAccumulation:
    """
    逐用户、逐块抽样 |ĝ|²，交给 block_sinrs 计算 SINR 并累加矩

    batch_size 给定时每块按 batch_slices 切批后逐批累加 (配合 BatchMeans)。
    """
    check_user(config, user)
    n_samples = check_samples(n_samples)
    seed = check_seed(seed)
    acc = UserRateAccumulation(target=user, moments=moments)
    for n in range(config.n_users):
        stats = derive_link_stats(config, n, tx_power_dbm)
        if not stats.omega_hat > 0.0:
            acc.degenerate = True
        acc.common[n] = StreamAccumulator(moments)
        for block, unit in channel_gain_blocks(stats.m, seed, point_index, n, n_samples, block_size):
            g_hat_sq = unit * stats.omega_hat
            gamma_c, gamma_p = block_sinrs(n, stats, block, g_hat_sq, n == user)
            for part in batch_slices(g_hat_sq.size, batch_size):
                common_rates = acc.common[n].add(gamma_c[part])
                if n == user:
                    private_rates = acc.private.add(gamma_p[part])
                    for mode in McMode:
                        acc.total[mode].update(common_rates[mode] + private_rates[mode])
    return acc


def mc_stream_rates(
    config: SystemConfig,
    user: int,
    tx_power_dbm: float,
    stream: Stream,
    n_samples: int,
    seed: int,
    point_index: int = 0,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> Dict[McMode, McEstimate]:
    """同一批抽样上给出两种模式的流速率估计"""
    n_samples = check_samples(n_samples)
    seed = check_seed(seed)
    stats = derive_link_stats(config, user, tx_power_dbm)
    stream = Stream(stream)
    degenerate = not stats.omega_hat > 0.0

    acc = StreamAccumulator()
    for _, unit in channel_gain_blocks(stats.m, seed, point_index, user, n_samples, block_size):
        acc.add(instantaneous_sinr(config, user, stats, unit * stats.omega_hat, stream))

    return {
        mode: McEstimate(
            mean=acc.rates[mode].mean,
            stderr=acc.rates[mode].stderr,
            n_samples=n_samples,
            mode=mode,
            seed=seed,
            degenerate=degenerate,
            mean_sinr=acc.sinr.mean,
        )
        for mode in McMode
    }


def mc_stream_rate(
    config: SystemConfig,
    user: int,
    tx_power_dbm: float,
    stream: Stream,
    mode: McMode,
    n_samples: int,
    seed: int,
    point_index: int = 0,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> McEstimate:
    """单个流 (公共/私有) 的速率估计"""
    return mc_stream_rates(config, user, tx_power_dbm, stream, n_samples, seed, point_index, block_size)[McMode(mode)]


def _formula_block_sinrs(config: SystemConfig) -> BlockSinrFn:
    def block_sinrs(n, stats, block, g_hat_sq, want_private):
        gamma_c = instantaneous_sinr(config, n, stats, g_hat_sq, Stream.COMMON)
        gamma_p = instantaneous_sinr(config, n, stats, g_hat_sq, Stream.PRIVATE) if want_private else None
        return gamma_c, gamma_p
    return block_sinrs


def mc_user_rates(
    config: SystemConfig,
    user: int,
    tx_power_dbm: float,
    n_samples: int,
    seed: int,
    point_index: int = 0,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> Dict[McMode, McEstimate]:
    """用户总速率在两种模式下的估计，同一批抽样"""
    acc = accumulate_user_rates(
        config, user, tx_power_dbm, n_samples, seed, point_index, block_size,
        _formula_block_sinrs(config),
    )
    return {mode: acc.estimate(mode, int(n_samples), int(seed)) for mode in McMode}


def mc_user_rate(
    config: SystemConfig,
    user: int,
    tx_power_dbm: float,
    mode: McMode,
    n_samples: int,
    seed: int,
    point_index: int = 0,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> McEstimate:
    """min_n E[公共流] + E[私有流_user]"""
    return mc_user_rates(config, user, tx_power_dbm, n_samples, seed, point_index, block_size)[McMode(mode)]
