from .expint import expint_e1, expint_e1_scaled
from .gamma import (
    GammaMethod,
    ScaledGammaValue,
    exp_scaled_upper_gamma,
    ln_gamma,
    upper_incomplete_gamma,
)

__all__ = [
    "GammaMethod",
    "ScaledGammaValue",
    "exp_scaled_upper_gamma",
    "expint_e1",
    "expint_e1_scaled",
    "ln_gamma",
    "upper_incomplete_gamma",
]
