from EasyRSMA.system_model import KernelTerms

from .ergodic_rate import (
    RateFlag,
    RateReport,
    common_rate,
    ergodic_rate,
    ergodic_rates,
    ideal_ergodic_rate,
    private_rate,
    rate_flags,
    user_common_kernel,
)
from .metrics import FairnessReport, energy_efficiency, fairness_report, jains_fairness, sum_rate
from .rate_kernel import LN2, exact_rate, rate_kernel, topsoe_rate

__all__ = [
    "LN2",
    "FairnessReport",
    "KernelTerms",
    "RateFlag",
    "RateReport",
    "common_rate",
    "energy_efficiency",
    "ergodic_rate",
    "ergodic_rates",
    "exact_rate",
    "fairness_report",
    "ideal_ergodic_rate",
    "jains_fairness",
    "private_rate",
    "rate_flags",
    "rate_kernel",
    "sum_rate",
    "topsoe_rate",
    "user_common_kernel",
]
