from .noma import (
    NomaConfig,
    NomaRole,
    mc_noma_rate,
    mc_noma_rates,
    noma_coefficients,
    noma_ergodic_rate,
    noma_rates,
    noma_sinr,
    noma_stats,
    validate_noma_config,
)

__all__ = [
    "NomaConfig",
    "NomaRole",
    "mc_noma_rate",
    "mc_noma_rates",
    "noma_coefficients",
    "noma_ergodic_rate",
    "noma_rates",
    "noma_sinr",
    "noma_stats",
    "validate_noma_config",
]
