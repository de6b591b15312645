"""闭式解常数 C1, A1, A2, C2, B1, B2, D1 以及瞬时 SINR"""
from dataclasses import dataclass
from enum import StrEnum
from typing import NamedTuple, Union

import numpy as np

from EasyRSMA.common.errors import DegenerateChannelError
from .config import SystemConfig
from .link_stats import LinkStats


class Stream(StrEnum):
    COMMON = "common"
    PRIVATE = "private"


class KernelTerms(NamedTuple):
    """速率核的五个参数：SINR = c·x / (a1·x + a2)，x ~ Gamma(m, 1/d1)"""
    c: float
    a1: float
    a2: float
    m: float
    d1: float


@dataclass(frozen=True)
class CoefficientSet:
    c1: float
    a1: float
    a2: float
    c2: float
    b1: float
    b2: float
    d1: float

    def common_terms(self, m: float) -> KernelTerms:
        return KernelTerms(self.c1, self.a1, self.a2, m, self.d1)

    def private_terms(self, m: float) -> KernelTerms:
        return KernelTerms(self.c2, self.b1, self.b2, m, self.d1)


def _others_private(config: SystemConfig, user: int) -> float:
    return sum(b for j, b in enumerate(config.beta_private) if j != user)


def _sinr_coefficients(config: SystemConfig, user: int, stats: LinkStats) -> CoefficientSet:
    """不检查 Ω̂，供 SINR 计算使用；D1 在 Ω̂ = 0 时记为 inf"""
    rho = stats.rho
    beta_c = config.beta_common
    total_private = config.total_private()
    distortion = config.kappa_r_sq[user] + config.kappa_t_sq
    phi = config.phi[user]
    omega_err = stats.omega_err

    c1 = rho * beta_c
    a1 = rho * (total_private + distortion)
    a2 = rho * omega_err * (beta_c + total_private + distortion) + 1.0
    c2 = rho * config.beta_private[user]
    b1 = rho * (_others_private(config, user) + phi * beta_c + distortion)
    b2 = rho * omega_err * (phi * beta_c + total_private + distortion) + 1.0
    d1 = stats.m / stats.omega_hat if stats.omega_hat > 0.0 else float("inf")
    return CoefficientSet(c1=c1, a1=a1, a2=a2, c2=c2, b1=b1, b2=b2, d1=d1)


def rsma_coefficients(config: SystemConfig, user: int, stats: LinkStats) -> CoefficientSet:
    """
    闭式解常数

    Raises:
        DegenerateChannelError: Ω̂ = 0 时闭式解无定义
    """
    if not stats.omega_hat > 0.0:
        raise DegenerateChannelError(f"estimated channel variance is zero for user {user} (rho={stats.rho:g})")
    return _sinr_coefficients(config, user, stats)


def ideal_coefficients(config: SystemConfig, user: int, stats: LinkStats) -> CoefficientSet:
    """理想情况 (ξ→∞, φ=0, κ=0) 的常数，单独编码"""
    rho = stats.rho
    if not stats.omega_total > 0.0:
        raise DegenerateChannelError(f"channel variance is zero for user {user}")
    return CoefficientSet(
        c1=rho * config.beta_common,
        a1=rho * config.total_private(),
        a2=1.0,
        c2=rho * config.beta_private[user],
        b1=rho * _others_private(config, user),
        b2=1.0,
        d1=stats.m / stats.omega_total,
    )


def sinr_from_terms(c: float, a1: float, a2: float, g_hat_sq: Union[float, np.ndarray]):
    """γ = c·x / (a1·x + a2)"""
    return c * g_hat_sq / (a1 * g_hat_sq + a2)


def instantaneous_sinr(
    config: SystemConfig,
    user: int,
    stats: LinkStats,
    g_hat_sq: Union[float, np.ndarray],
    stream: Stream,
):
    """
    给定 |ĝ_n|² 的瞬时 SINR

    公共流：γ_c = C1·x / (A1·x + A2)
    私有流：γ_p = C2·x / (B1·x + B2)
    g_hat_sq 可以是标量或 numpy 数组。
    """
    coeffs = _sinr_coefficients(config, user, stats)
    if Stream(stream) is Stream.COMMON:
        return sinr_from_terms(coeffs.c1, coeffs.a1, coeffs.a2, g_hat_sq)
    return sinr_from_terms(coeffs.c2, coeffs.b1, coeffs.b2, g_hat_sq)
