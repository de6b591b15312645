"""
速率核：对 γ = c·x/(a1·x + a2)，x ~ Gamma(m, scale 1/d1)，给出
E[2γ/((2+γ)·ln2)] 的闭式解

    ζ = d1^m · c · (a2/(a1+c/2))^m · Γ(m+1) · e^X Γ(-m, X) / (ln2 · Γ(m) · (a1+c/2))
    X = d1·a2/(a1+c/2)

d1 = m/Ω̂ 可达 1e8 量级，整个式子在对数域计算。
"""
import math

import numpy as np

from EasyRSMA.common.errors import DegenerateChannelError, DegenerateInputError
from EasyRSMA.specfun import exp_scaled_upper_gamma, ln_gamma

LN2 = math.log(2.0)
LOG_LN2 = math.log(LN2)


def rate_kernel(c: float, a1: float, a2: float, m: float, d1: float) -> float:
    """
    Topsøe 近似下的期望速率 (bps/Hz)

    Raises:
        DegenerateChannelError: d1 ≤ 0 或 d1 = inf (估计信道方差为 0)
        DegenerateInputError: 系数越界
    """
    for name, value in (("c", c), ("a1", a1), ("a2", a2), ("m", m)):
        if not math.isfinite(value):
            raise DegenerateInputError(f"rate kernel argument {name} must be finite, got {value}")
    if math.isnan(d1) or not d1 > 0.0 or math.isinf(d1):
        raise DegenerateChannelError(f"rate kernel undefined for d1={d1}")
    if c < 0.0 or a1 < 0.0 or a2 < 1.0 or m < 0.5:
        raise DegenerateInputError(f"rate kernel arguments out of range: c={c}, a1={a1}, a2={a2}, m={m}")
    if c == 0.0:
        return 0.0

    denom = a1 + 0.5 * c
    log_denom = math.log(denom)
    x = d1 * a2 / denom
    scaled = exp_scaled_upper_gamma(-m, x)

    log_zeta = (
        m * math.log(d1)
        + math.log(c)
        + m * (math.log(a2) - log_denom)
        + ln_gamma(m + 1.0)
        - ln_gamma(m)
        - log_denom
        - LOG_LN2
        + scaled.log_value
    )
    return math.exp(log_zeta)


def topsoe_rate(sinr):
    """2γ/((2+γ)·ln2)，log2(1+γ) 的近似，γ ≤ 1 时紧致"""
    sinr = np.asarray(sinr, dtype=float)
    return 2.0 * sinr / ((2.0 + sinr) * LN2)


def exact_rate(sinr):
    """log2(1+γ)"""
    return np.log1p(np.asarray(sinr, dtype=float)) / LN2
