"""路损与信道估计误差统计量"""
import math
from dataclasses import dataclass

from EasyRSMA.common.errors import ConfigValidationError
from .config import SystemConfig


@dataclass(frozen=True)
class LinkStats:
    """单用户派生统计量：ρ, Ω_n, Ω_gne, Ω̂_n, m_n"""
    rho: float
    omega_total: float
    omega_err: float
    omega_hat: float
    m: float


def dbm_to_watts(power_dbm: float) -> float:
    if power_dbm == -math.inf:
        return 0.0
    return 10.0 ** ((power_dbm - 30.0) / 10.0)


def linear_snr(tx_power_dbm: float, noise_dbm: float) -> float:
    """ρ = P/σ²，两者都以 dBm 表示"""
    if tx_power_dbm == -math.inf:
        return 0.0
    return 10.0 ** ((tx_power_dbm - noise_dbm) / 10.0)


def pathloss_gain(config: SystemConfig, user: int) -> float:
    """Ω_n = δ / D_n^τ_n"""
    return config.pathloss_ref / config.distance_m[user] ** config.pathloss_exp[user]


def check_user(config: SystemConfig, user: int) -> None:
    if not 0 <= user < config.n_users:
        raise ConfigValidationError(f"user index {user} out of range for {config.n_users} users", keys=("user",))


def derive_link_stats(config: SystemConfig, user: int, tx_power_dbm: float) -> LinkStats:
    """
    计算某用户在给定发射功率下的统计量

    Ω_gne = Ω_n / (1 + ρ ξ_n Ω_n)，ξ = INFINITY 时为 0。
    """
    check_user(config, user)
    if math.isnan(tx_power_dbm) or tx_power_dbm == math.inf:
        raise ConfigValidationError(f"transmit power must be finite or -inf, got {tx_power_dbm}", keys=("tx_power_dbm",))

    rho = linear_snr(tx_power_dbm, config.noise_dbm)
    omega = pathloss_gain(config, user)
    xi = config.xi[user]
    if math.isinf(xi):
        omega_err = 0.0
        omega_hat = omega
    else:
        # 低 SNR 时直接写出 Ω̂，避免 Ω - Ω_gne 的相消误差
        q = rho * xi * omega
        omega_err = omega / (1.0 + q)
        omega_hat = omega * q / (1.0 + q)
    return LinkStats(
        rho=rho,
        omega_total=omega,
        omega_err=omega_err,
        omega_hat=omega_hat,
        m=config.m[user],
    )
