"""
Gamma 函数族：ln Γ(a)、任意实阶 (含负阶) 上不完全 Gamma Γ(a,x)，
以及不溢出的 e^x·Γ(a,x)。

内部统一使用归一化量 u(a,x) = e^x·x^{-a}·Γ(a,x)，再回到对数域：
    ln(e^x·Γ(a,x)) = a·ln x + ln u
算法按 (a, x) 区域选择：
    a = 1                         闭式
    x ≥ max(60, 3|a|+30)          渐近级数
    x ≥ 1 且 x ≥ a+1              Legendre 连分式 (modified Lentz)
    a > 0 且 x < a+1              下不完全 Gamma 级数
    a ≤ 0 且 x < 1                向下递推，种子为 E1(x) 或 |s| < 1 的小数阶处的值
"""
import logging
import math
import sys
from dataclasses import dataclass
from enum import StrEnum

from EasyRSMA.common.errors import SpecialFunctionError
from .expint import expint_e1_scaled

logger = logging.getLogger(__name__)

EPS = sys.float_info.epsilon
FPMIN = sys.float_info.min / EPS
MAX_SERIES_ITERATIONS = 100000
MAX_CF_ITERATIONS = 1000000

HALF_LOG_2PI = 0.91893853320467274178
# Stirling 级数 B_{2k} / (2k(2k-1)) 系数
STIRLING_COEFFICIENTS = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)
STIRLING_MIN_ARG = 10.0

# 小数部分低于该值时 Γ(a)-γ(a,x) 相消严重，改用连分式
SMALL_ORDER = 0.1


class GammaMethod(StrEnum):
    RECURRENCE = "recurrence"
    CONTINUED_FRACTION = "continued_fraction"
    ASYMPTOTIC = "asymptotic"
    SERIES = "series"
    CLOSED_FORM = "closed_form"


@dataclass(frozen=True)
class ScaledGammaValue:
    """e^x·Γ(a,x)，以对数形式保存"""
    log_value: float
    method_used: GammaMethod

    @property
    def value(self) -> float:
        try:
            return math.exp(self.log_value)
        except OverflowError:
            raise SpecialFunctionError(f"e^x*Gamma(a,x) overflows double precision (log value {self.log_value:g})") from None


def ln_gamma(a: float) -> float:
    """
    ln Γ(a)，a > 0

    a ≥ 10 用 Stirling 级数，否则先上移到 10 以上再减去移位乘积的对数。
    """
    if not a > 0.0 or math.isnan(a):
        raise SpecialFunctionError(f"ln_gamma requires a > 0, got {a}")
    if math.isinf(a):
        return math.inf
    if a == 1.0 or a == 2.0:
        return 0.0

    z = a
    shift = 1.0
    while z < STIRLING_MIN_ARG:
        shift *= z
        z += 1.0

    inv = 1.0 / z
    inv2 = inv * inv
    series = 0.0
    for coeff in reversed(STIRLING_COEFFICIENTS):
        series = series * inv2 + coeff
    series *= inv

    result = (z - 0.5) * math.log(z) - z + HALF_LOG_2PI + series
    if shift != 1.0:
        result -= math.log(shift)
    return result


def _check_args(a: float, x: float) -> None:
    if math.isnan(a) or math.isinf(a):
        raise SpecialFunctionError(f"order a must be finite, got {a}")
    if not x > 0.0 or math.isnan(x):
        raise SpecialFunctionError(f"incomplete gamma requires x > 0, got {x}")


def _lower_series_sum(a: float, x: float) -> float:
    """γ(a,x) = e^{-x} x^a · Σ_n x^n / (a(a+1)…(a+n))"""
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(MAX_SERIES_ITERATIONS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * EPS:
            return total
    raise SpecialFunctionError(f"incomplete gamma series did not converge for a={a}, x={x}")


def _log_scaled_by_series(a: float, x: float) -> float:
    """ln(e^x·Γ(a,x))，a > 0，通过 Γ(a,x) = Γ(a)·(1 - P(a,x))"""
    lgam = ln_gamma(a)
    p = math.exp(-x + a * math.log(x) - lgam) * _lower_series_sum(a, x)
    if p >= 1.0:
        raise SpecialFunctionError(f"regularized lower gamma reached 1 for a={a}, x={x}")
    return x + lgam + math.log1p(-p)


def _normalized_by_continued_fraction(a: float, x: float) -> float:
    """u = e^x x^{-a} Γ(a,x)，Legendre 连分式"""
    b = x + 1.0 - a
    c = 1.0 / FPMIN
    d = 1.0 / b if abs(b) > FPMIN else 1.0 / FPMIN
    h = d
    for i in range(1, MAX_CF_ITERATIONS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return h
    raise SpecialFunctionError(f"incomplete gamma continued fraction did not converge for a={a}, x={x}")


def _normalized_by_asymptotic(a: float, x: float) -> float:
    """u ~ (1/x)·Σ_k (a-1)(a-2)…(a-k) / x^k"""
    term = 1.0
    total = 1.0
    for k in range(1, MAX_SERIES_ITERATIONS):
        next_term = term * (a - k) / x
        if next_term == 0.0 or abs(next_term) < 1e-17 * abs(total):
            total += next_term
            break
        if abs(next_term) > abs(term):
            # 渐近级数开始发散，在最小项处截断
            break
        term = next_term
        total += term
    return total / x


def _normalized_fractional_seed(a0: float, x: float) -> float:
    """0 < a0 < 1 处的 u，作为向下递推的起点"""
    if a0 >= SMALL_ORDER:
        return math.exp(_log_scaled_by_series(a0, x) - a0 * math.log(x))
    return _normalized_by_continued_fraction(a0, x)


def _normalized_by_recurrence(a: float, x: float) -> float:
    """
    a ≤ 0, x < 1：u_{s-1} = (x·u_s - 1)/(s - 1)

    整数阶从 u_0 = e^x·E1(x) 出发，非整数阶从小数部分出发；
    小数部分接近 1 时改从 a - ceil(a) ∈ (-SMALL_ORDER, 0) 出发，每步除数 |s - 1| ≥ SMALL_ORDER。
    """
    floor_a = math.floor(a)
    if a == floor_a:
        s = 0.0
        u = expint_e1_scaled(x)
    elif a - floor_a > 1.0 - SMALL_ORDER:
        s = a - math.ceil(a)
        u = _normalized_by_continued_fraction(s, x)
    else:
        s = a - floor_a
        u = _normalized_fractional_seed(s, x)
    steps = int(round(s - a))
    for _ in range(steps):
        u = (x * u - 1.0) / (s - 1.0)
        s -= 1.0
    if not u > 0.0:
        raise SpecialFunctionError(f"downward recurrence lost positivity for a={a}, x={x}")
    return u


def exp_scaled_upper_gamma(a: float, x: float) -> ScaledGammaValue:
    """
    e^x·Γ(a,x)，x 可到 700 以上而不溢出

    Args:
        a: 任意实数阶 (速率闭式中使用 a = -m)
        x: x > 0

    Returns:
        ScaledGammaValue(log_value, method_used)
    """
    _check_args(a, x)

    if a == 1.0:
        return ScaledGammaValue(0.0, GammaMethod.CLOSED_FORM)

    if x >= max(60.0, 3.0 * abs(a) + 30.0):
        u = _normalized_by_asymptotic(a, x)
        method = GammaMethod.ASYMPTOTIC
    elif x >= 1.0 and x >= a + 1.0:
        u = _normalized_by_continued_fraction(a, x)
        method = GammaMethod.CONTINUED_FRACTION
    elif a > 0.0:
        if a >= SMALL_ORDER:
            return ScaledGammaValue(_log_scaled_by_series(a, x), GammaMethod.SERIES)
        u = _normalized_by_continued_fraction(a, x)
        method = GammaMethod.CONTINUED_FRACTION
    else:
        u = _normalized_by_recurrence(a, x)
        method = GammaMethod.RECURRENCE

    if not u > 0.0 or math.isinf(u):
        raise SpecialFunctionError(f"scaled incomplete gamma is not positive for a={a}, x={x} ({method})")
    return ScaledGammaValue(a * math.log(x) + math.log(u), method)


def upper_incomplete_gamma(a: float, x: float) -> float:
    """
    上不完全 Gamma 函数 Γ(a,x) = ∫_x^∞ t^{a-1} e^{-t} dt

    x 很大时下溢为 0.0；结果超出双精度范围时抛 SpecialFunctionError。
    """
    scaled = exp_scaled_upper_gamma(a, x)
    log_value = scaled.log_value - x
    try:
        return math.exp(log_value)
    except OverflowError:
        raise SpecialFunctionError(f"Gamma({a}, {x}) overflows double precision") from None
