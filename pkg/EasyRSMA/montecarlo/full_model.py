"""
端到端接收信号仿真

    y_n = (ĝ_n + g_ne)·(√(Pβ_c)x_c + Σ_k √(Pβ_k)x_k + η_t + η_rn) + w_n

功率以噪声功率 σ² 归一化 (P/σ² = ρ)。ĝ 的幅度与 mc_user_rate 共用信道子流，
相位、g_e、符号、失真和 AWGN 来自 FULL_MODEL 子流。

SINR 由实际抽到的分量逐批记账：接收端已知 ĝ，把 y 中除期望分量以外的部分分成
经 ĝ 的干扰 ĝ·u 和经 g_e 的残差加噪声 g_e·t + w；u、g_e·t + w 以及期望符号的功率
都取本批实际样本的均值。样本 i 的 SINR 为

    |ĝ_i|²·ŝ / (|ĝ_i|²·â + b̂)

不完美 SIC 后残留的公共流为 √φ_n·√(Pβ_c)x_c，经 ĝ 与 g_e 两条路径。
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np

from EasyRSMA.system_model import LinkStats, SystemConfig
from .estimator import (
    BatchMeans,
    BlockSinrFn,
    McEstimate,
    McMode,
    accumulate_user_rates,
    batch_slices,
    check_samples,
)
from .rng import Purpose, substream
from .sampler import DEFAULT_BLOCK_SIZE

logger = logging.getLogger(__name__)

COMMON = "common"
TX_DISTORTION = "tx_distortion"
RX_DISTORTION = "rx_distortion"
AWGN = "awgn"

MIN_MOMENT_BATCH = 256
MAX_MOMENT_BATCH = 2 ** 14
TARGET_BATCHES = 64


def private_component(k: int) -> str:
    return f"private_{k}"


def complex_normal(rng: np.random.Generator, size: int, variance: float = 1.0) -> np.ndarray:
    """CN(0, variance)"""
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def moment_batch_size(n_samples: int) -> int:
    """功率记账的批长度：约 TARGET_BATCHES 批，限制在 [256, 2^14]"""
    return max(MIN_MOMENT_BATCH, min(MAX_MOMENT_BATCH, int(n_samples) // TARGET_BATCHES))


def _mean_power(values: np.ndarray) -> float:
    return float(np.mean(np.abs(values) ** 2))


class StreamMoments(NamedTuple):
    """一批样本上的功率记账：期望分量 ŝ、经 ĝ 的干扰 â、经 g_e 的残差加噪声 b̂"""
    signal: float
    via_estimate: float
    via_error: float

    def sinr(self, g_hat_sq: np.ndarray) -> np.ndarray:
        return g_hat_sq * self.signal / (g_hat_sq * self.via_estimate + self.via_error)


@dataclass
class ReceivedSignal:
    """
    一个块的接收信号

    transmitted 保存发射侧各分量 (√p·x 与失真)，noise 为 AWGN，
    接收分量为 (ĝ + g_e)·transmitted 加 noise。
    """
    g_hat: np.ndarray
    g_err: np.ndarray
    omega_err: float
    powers: Dict[str, float]
    transmitted: Dict[str, np.ndarray]
    noise: np.ndarray

    @property
    def channel(self) -> np.ndarray:
        return self.g_hat + self.g_err

    @property
    def components(self) -> Dict[str, np.ndarray]:
        received = {name: self.channel * x for name, x in self.transmitted.items()}
        received[AWGN] = self.noise
        return received

    @property
    def y(self) -> np.ndarray:
        return self.channel * sum(self.transmitted.values()) + self.noise

    def empirical_power(self) -> float:
        """块内 |y|² 的均值"""
        return _mean_power(self.y)

    def expected_power(self) -> float:
        """按模型方差，给定 ĝ 时 E|y|² 的块内均值"""
        transmit = sum(p for name, p in self.powers.items() if name != AWGN)
        channel = np.abs(self.g_hat) ** 2 + self.omega_err
        return float(np.mean(channel) * transmit + self.powers[AWGN])

    def stream_moments(self, user: int, phi: float, part: slice = slice(None)) -> Tuple[StreamMoments, StreamMoments]:
        """
        一批样本上公共流与 SIC 后私有流的功率记账

        公共流把其余全部分量当干扰；私有流在公共流被消去后只剩 √φ 倍的残留。
        """
        x = {name: values[part] for name, values in self.transmitted.items()}
        g_err = self.g_err[part]
        noise = self.noise[part]
        total = sum(x.values())

        desired_c = x[COMMON]
        common = StreamMoments(
            signal=_mean_power(desired_c),
            via_estimate=_mean_power(total - desired_c),
            via_error=_mean_power(g_err * total + noise),
        )

        after_sic = total - (1.0 - math.sqrt(phi)) * desired_c
        desired_p = x[private_component(user)]
        private = StreamMoments(
            signal=_mean_power(desired_p),
            via_estimate=_mean_power(after_sic - desired_p),
            via_error=_mean_power(g_err * after_sic + noise),
        )
        return common, private

    def decoding_sinrs(self, user: int, phi: float, batch_size: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        """公共流与 SIC 后私有流的逐样本 SINR，功率记账按 batch_slices 分批"""
        g_sq = np.abs(self.g_hat) ** 2
        gamma_c = np.empty_like(g_sq)
        gamma_p = np.empty_like(g_sq)
        for part in batch_slices(g_sq.size, batch_size):
            common, private = self.stream_moments(user, phi, part)
            gamma_c[part] = common.sinr(g_sq[part])
            gamma_p[part] = private.sinr(g_sq[part])
        return gamma_c, gamma_p


def transmit_powers(config: SystemConfig, user: int, rho: float) -> Dict[str, float]:
    powers = {COMMON: rho * config.beta_common}
    for k, beta in enumerate(config.beta_private):
        powers[private_component(k)] = rho * beta
    powers[TX_DISTORTION] = rho * config.kappa_t_sq
    powers[RX_DISTORTION] = rho * config.kappa_r_sq[user]
    powers[AWGN] = 1.0
    return powers


def simulate_received_signal(
    config: SystemConfig,
    user: int,
    stats: LinkStats,
    g_hat_sq: np.ndarray,
    rng: np.random.Generator,
) -> ReceivedSignal:
    """
    生成一个块的接收信号

    Args:
        g_hat_sq: |ĝ_n|² 抽样 (来自信道子流)
        rng: FULL_MODEL 子流
    """
    size = g_hat_sq.size
    phase = rng.uniform(0.0, 2.0 * math.pi, size)
    g_hat = np.sqrt(g_hat_sq) * np.exp(1j * phase)
    g_err = complex_normal(rng, size, stats.omega_err)

    powers = transmit_powers(config, user, stats.rho)
    transmitted: Dict[str, np.ndarray] = {}
    for name, p in powers.items():
        if name == AWGN:
            continue
        if name in (TX_DISTORTION, RX_DISTORTION):
            transmitted[name] = complex_normal(rng, size, p)
        else:
            # 单位功率高斯码本符号
            transmitted[name] = math.sqrt(p) * complex_normal(rng, size)
    noise = complex_normal(rng, size, powers[AWGN])
    return ReceivedSignal(
        g_hat=g_hat, g_err=g_err, omega_err=stats.omega_err, powers=powers,
        transmitted=transmitted, noise=noise,
    )


def _full_model_block_sinrs(config: SystemConfig, seed: int, point_index: int, batch_size: int) -> BlockSinrFn:
    def block_sinrs(n, stats, block, g_hat_sq, want_private):
        rng = substream(seed, point_index, n, block, Purpose.FULL_MODEL)
        signal = simulate_received_signal(config, n, stats, g_hat_sq, rng)
        gamma_c, gamma_p = signal.decoding_sinrs(n, config.phi[n], batch_size)
        return gamma_c, (gamma_p if want_private else None)
    return block_sinrs


def mc_full_model_rate(
    config: SystemConfig,
    user: int,
    tx_power_dbm: float,
    n_samples: int,
    seed: int,
    point_index: int = 0,
    block_size: int = DEFAULT_BLOCK_SIZE,
    mode: McMode = McMode.EXACT_LOG,
    batch_size: Optional[int] = None,
) -> McEstimate:
    """
    基于完整接收信号模型的用户速率估计

    与 mc_user_rate 使用同样的 min_n 公共流 + 私有流组合；
    标准误用批均值法，包含按批功率记账带来的波动。
    """
    batch_size = moment_batch_size(check_samples(n_samples)) if batch_size is None else int(batch_size)
    acc = accumulate_user_rates(
        config, user, tx_power_dbm, n_samples, seed, point_index, block_size,
        _full_model_block_sinrs(config, int(seed), point_index, batch_size),
        moments=BatchMeans,
        batch_size=batch_size,
    )
    estimate = acc.estimate(mode, int(n_samples), int(seed))
    logger.debug(f"full-model rate user={user} P={tx_power_dbm} dBm: {estimate.mean:.6g} ± {estimate.stderr:.3g}")
    return estimate


