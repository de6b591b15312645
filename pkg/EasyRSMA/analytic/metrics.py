"""系统级指标：和速率、能效 (EE)、Jain 公平性指数 (JFI)"""
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from EasyRSMA.common.errors import DegenerateInputError
from EasyRSMA.system_model import SystemConfig, dbm_to_watts
from .ergodic_rate import RateReport, ergodic_rates

RateLike = Union[RateReport, float]


@dataclass(frozen=True)
class FairnessReport:
    jfi: float
    sum_rate: float
    ee: float


def _as_array(rates: Iterable[RateLike]) -> np.ndarray:
    return np.array(
        [r.total_rate if isinstance(r, RateReport) else float(r) for r in rates],
        dtype=float,
    )


def sum_rate(rates: Iterable[RateLike]) -> float:
    return float(np.sum(_as_array(rates)))


def energy_efficiency(
    config: SystemConfig,
    tx_power_dbm: float,
    rates: Optional[Sequence[RateLike]] = None,
) -> float:
    """EE = ΣR_n / (P + P_c)，单位 bps/Hz/W"""
    if rates is None:
        rates = ergodic_rates(config, tx_power_dbm)
    total = sum_rate(rates)
    if total == 0.0:
        return 0.0
    return total / (dbm_to_watts(tx_power_dbm) + config.circuit_power_w)


def jains_fairness(rates: Iterable[RateLike]) -> float:
    """
    JFI = (ΣR)² / (N·ΣR²)，取值 [1/N, 1]

    Raises:
        DegenerateInputError: 空输入、负速率或全零速率
    """
    values = _as_array(rates)
    if values.size == 0:
        raise DegenerateInputError("Jain's fairness index of an empty rate vector is undefined")
    if not np.all(np.isfinite(values)) or np.any(values < 0.0):
        raise DegenerateInputError(f"rates must be finite and nonnegative, got {values.tolist()}")
    sum_sq = float(np.sum(values ** 2))
    if sum_sq == 0.0:
        raise DegenerateInputError("Jain's fairness index of an all-zero rate vector is undefined")
    jfi = float(np.sum(values)) ** 2 / (values.size * sum_sq)
    # 浮点舍入可能略超出理论范围
    return min(max(jfi, 1.0 / values.size), 1.0)


def fairness_report(config: SystemConfig, tx_power_dbm: float) -> FairnessReport:
    rates = ergodic_rates(config, tx_power_dbm)
    return FairnessReport(
        jfi=jains_fairness(rates),
        sum_rate=sum_rate(rates),
        ee=energy_efficiency(config, tx_power_dbm, rates),
    )
