"""各用户遍历速率的闭式解：R_n ≃ ζ1 + ζ2"""
import logging
import math
from dataclasses import dataclass, field
from enum import StrEnum
from typing import FrozenSet, List

from EasyRSMA.system_model import (
    SystemConfig,
    derive_link_stats,
    ideal_coefficients,
    rsma_coefficients,
)
from EasyRSMA.system_model.link_stats import check_user, linear_snr
from .rate_kernel import rate_kernel

logger = logging.getLogger(__name__)


class RateFlag(StrEnum):
    IDEAL = "ideal"
    IMPERFECT_CSIR = "imperfect_csir"
    IMPERFECT_SIC = "imperfect_sic"
    HW_IMPAIRED = "hw_impaired"


@dataclass(frozen=True)
class RateReport:
    user: int
    common_rate: float
    private_rate: float
    total_rate: float
    flags: FrozenSet[RateFlag] = field(default_factory=frozenset)


def rate_flags(config: SystemConfig, user: int) -> FrozenSet[RateFlag]:
    flags = set()
    if not math.isinf(config.xi[user]):
        flags.add(RateFlag.IMPERFECT_CSIR)
    if config.phi[user] > 0.0:
        flags.add(RateFlag.IMPERFECT_SIC)
    if config.kappa_t_sq > 0.0 or config.kappa_r_sq[user] > 0.0:
        flags.add(RateFlag.HW_IMPAIRED)
    if not flags:
        flags.add(RateFlag.IDEAL)
    return frozenset(flags)


def _zero_report(user: int, flags: FrozenSet[RateFlag]) -> RateReport:
    return RateReport(user=user, common_rate=0.0, private_rate=0.0, total_rate=0.0, flags=flags)


def _is_silent(config: SystemConfig, tx_power_dbm: float) -> bool:
    return linear_snr(tx_power_dbm, config.noise_dbm) == 0.0


def user_common_kernel(config: SystemConfig, user: int, tx_power_dbm: float) -> float:
    """用户 n 自己解公共流的期望速率 (取 min 之前)"""
    stats = derive_link_stats(config, user, tx_power_dbm)
    coeffs = rsma_coefficients(config, user, stats)
    return rate_kernel(*coeffs.common_terms(stats.m))


def common_rate(config: SystemConfig, tx_power_dbm: float) -> float:
    """ζ1 = min_n E[公共流速率]，min 在各用户期望之外"""
    if _is_silent(config, tx_power_dbm):
        return 0.0
    return min(user_common_kernel(config, n, tx_power_dbm) for n in range(config.n_users))


def private_rate(config: SystemConfig, user: int, tx_power_dbm: float) -> float:
    """ζ2"""
    if _is_silent(config, tx_power_dbm):
        return 0.0
    stats = derive_link_stats(config, user, tx_power_dbm)
    coeffs = rsma_coefficients(config, user, stats)
    return rate_kernel(*coeffs.private_terms(stats.m))


def ergodic_rates(config: SystemConfig, tx_power_dbm: float) -> List[RateReport]:
    """所有用户的速率，共享同一个 ζ1"""
    if _is_silent(config, tx_power_dbm):
        return [_zero_report(n, rate_flags(config, n)) for n in range(config.n_users)]
    zeta1 = common_rate(config, tx_power_dbm)
    reports = []
    for n in range(config.n_users):
        zeta2 = private_rate(config, n, tx_power_dbm)
        reports.append(RateReport(
            user=n,
            common_rate=zeta1,
            private_rate=zeta2,
            total_rate=zeta1 + zeta2,
            flags=rate_flags(config, n),
        ))
    logger.debug(f"closed-form rates at {tx_power_dbm} dBm: {[r.total_rate for r in reports]}")
    return reports


def ergodic_rate(config: SystemConfig, user: int, tx_power_dbm: float) -> RateReport:
    """R_n = ζ1 + ζ2"""
    if _is_silent(config, tx_power_dbm):
        check_user(config, user)
        return _zero_report(user, rate_flags(config, user))
    zeta1 = common_rate(config, tx_power_dbm)
    zeta2 = private_rate(config, user, tx_power_dbm)
    return RateReport(
        user=user,
        common_rate=zeta1,
        private_rate=zeta2,
        total_rate=zeta1 + zeta2,
        flags=rate_flags(config, user),
    )


def ideal_ergodic_rate(config: SystemConfig, user: int, tx_power_dbm: float) -> RateReport:
    """理想情况 (完美 CSIR / SIC / 硬件) 的速率，独立的系数路径"""
    check_user(config, user)
    flags = frozenset({RateFlag.IDEAL})
    if _is_silent(config, tx_power_dbm):
        return _zero_report(user, flags)

    common_values = []
    private_value = 0.0
    for n in range(config.n_users):
        stats = derive_link_stats(config, n, tx_power_dbm)
        coeffs = ideal_coefficients(config, n, stats)
        common_values.append(rate_kernel(*coeffs.common_terms(stats.m)))
        if n == user:
            private_value = rate_kernel(*coeffs.private_terms(stats.m))
    zeta1 = min(common_values)
    return RateReport(
        user=user,
        common_rate=zeta1,
        private_rate=private_value,
        total_rate=zeta1 + private_value,
        flags=flags,
    )
