from .coefficients import (
    CoefficientSet,
    KernelTerms,
    Stream,
    ideal_coefficients,
    instantaneous_sinr,
    rsma_coefficients,
    sinr_from_terms,
)
from .config import INFINITY, SystemConfig, validate_config, validate_model
from .link_stats import LinkStats, check_user, dbm_to_watts, derive_link_stats, linear_snr, pathloss_gain

__all__ = [
    "INFINITY",
    "CoefficientSet",
    "KernelTerms",
    "LinkStats",
    "Stream",
    "SystemConfig",
    "check_user",
    "dbm_to_watts",
    "derive_link_stats",
    "ideal_coefficients",
    "instantaneous_sinr",
    "linear_snr",
    "pathloss_gain",
    "rsma_coefficients",
    "sinr_from_terms",
    "validate_config",
    "validate_model",
]
