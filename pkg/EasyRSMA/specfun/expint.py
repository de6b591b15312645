"""指数积分 E1(x)"""
import math
import sys

from EasyRSMA.common.errors import SpecialFunctionError

EULER_GAMMA = 0.57721566490153286061

FPMIN = sys.float_info.min / sys.float_info.epsilon
EPS = sys.float_info.epsilon
MAX_ITERATIONS = 10000


def _e1_series(x: float) -> float:
    # E1(x) = -γ - ln x - Σ_{k≥1} (-x)^k / (k·k!)
    total = 0.0
    fact = 1.0
    for k in range(1, MAX_ITERATIONS):
        fact *= -x / k
        term = fact / k
        total += term
        if abs(term) < abs(total) * EPS:
            return -EULER_GAMMA - math.log(x) - total
    raise SpecialFunctionError(f"E1 series did not converge for x={x}")


def _e1_scaled_continued_fraction(x: float) -> float:
    """e^x·E1(x)，Legendre 连分式，modified Lentz"""
    b = x + 1.0
    c = 1.0 / FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITERATIONS):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < EPS:
            return h
    raise SpecialFunctionError(f"E1 continued fraction did not converge for x={x}")


def expint_e1(x: float) -> float:
    """
    指数积分 E1(x) = ∫_x^∞ t^{-1} e^{-t} dt

    x < 1 用幂级数，x ≥ 1 用连分式。x 很大时下溢为 0.0。
    """
    if not x > 0.0 or math.isnan(x):
        raise SpecialFunctionError(f"E1 requires x > 0, got {x}")
    if x < 1.0:
        return _e1_series(x)
    if math.isinf(x):
        return 0.0
    return _e1_scaled_continued_fraction(x) * math.exp(-x)


def expint_e1_scaled(x: float) -> float:
    """e^x·E1(x)，大 x 时不溢出"""
    if not x > 0.0 or math.isnan(x):
        raise SpecialFunctionError(f"E1 requires x > 0, got {x}")
    if x < 1.0:
        return math.exp(x) * _e1_series(x)
    return _e1_scaled_continued_fraction(x)
