import math

import mpmath
import numpy as np
from django.test import SimpleTestCase
from scipy import integrate

from EasyRSMA.common.errors import SpecialFunctionError
from EasyRSMA.specfun import (
    GammaMethod,
    exp_scaled_upper_gamma,
    expint_e1,
    expint_e1_scaled,
    ln_gamma,
    upper_incomplete_gamma,
)


def mp_scaled_gamma(a, x):
    with mpmath.workdps(30):
        return mpmath.exp(x) * mpmath.gammainc(a, x)


class ScaledGammaOracleTest(SimpleTestCase):
    """测试 e^x·Γ(a,x) 与高精度参考值一致"""

    def test_random_points_against_mpmath(self):
        """测试 1000 个随机点，a ∈ [-20, 20]，x ∈ [1e-3, 50]"""
        rng = np.random.default_rng(20240601)
        orders = rng.uniform(-20.0, 20.0, size=1000)
        # x 按对数均匀取样，覆盖 x < 1 的递推区域
        points = np.exp(rng.uniform(math.log(1e-3), math.log(50.0), size=1000))
        failures = []
        for a, x in zip(orders.tolist(), points.tolist()):
            got = exp_scaled_upper_gamma(a, x)
            expected = float(mpmath.log(mp_scaled_gamma(a, x)))
            # 对数差即相对误差
            if abs(got.log_value - expected) > 1e-9:
                failures.append((a, x, got.method_used, got.log_value, expected))
        self.assertEqual(failures, [])

    def test_integer_orders(self):
        for a in (-20.0, -5.0, -1.0, 0.0, 2.0, 4.0, 15.0):
            for x in (1e-3, 0.3, 1.0, 7.5, 40.0):
                with self.subTest(a=a, x=x):
                    got = exp_scaled_upper_gamma(a, x).value
                    expected = float(mp_scaled_gamma(a, x))
                    self.assertLess(abs(got - expected) / expected, 1e-10)

    def test_near_integer_orders(self):
        """测试阶数紧贴整数 (两侧) 时的递推精度"""
        offsets = (-1e-9, -1e-7, -1e-4, -0.05, 1e-9, 1e-7, 0.05)
        for base in (0.0, -1.0, -4.0, -12.0):
            for offset in offsets:
                a = base + offset
                if a > 0.0:
                    continue
                for x in (1e-3, 0.05, 0.5, 0.999):
                    with self.subTest(a=a, x=x):
                        got = exp_scaled_upper_gamma(a, x)
                        self.assertIs(got.method_used, GammaMethod.RECURRENCE)
                        with mpmath.workdps(40):
                            expected = float(mpmath.log(mpmath.exp(x) * mpmath.gammainc(a, x)))
                        self.assertLess(abs(got.log_value - expected), 1e-10)

    def test_large_x_against_mpmath(self):
        """测试大 x 不溢出"""
        for a, x in ((-1.0, 700.0), (-4.0, 700.0), (-0.5, 1e4), (2.5, 100.0), (-30.0, 1200.0)):
            with self.subTest(a=a, x=x):
                got = exp_scaled_upper_gamma(a, x)
                self.assertIs(got.method_used, GammaMethod.ASYMPTOTIC)
                expected = float(mp_scaled_gamma(a, x))
                self.assertLess(abs(got.value - expected) / expected, 1e-10)

    def test_against_quadrature(self):
        """测试 e^x·Γ(a,x) = x^a ∫_0^∞ (1+s)^{a-1} e^{-xs} ds"""
        rng = np.random.default_rng(7)
        for a, x in zip(rng.uniform(-5.0, 5.0, size=50), rng.uniform(0.1, 20.0, size=50)):
            a, x = float(a), float(x)
            integral, _ = integrate.quad(
                lambda s: (1.0 + s) ** (a - 1.0) * math.exp(-x * s), 0.0, math.inf,
                epsabs=0.0, epsrel=1e-12, limit=200,
            )
            expected = x ** a * integral
            with self.subTest(a=a, x=x):
                got = exp_scaled_upper_gamma(a, x).value
                self.assertLess(abs(got - expected) / expected, 1e-8)

    def test_recurrence_identity(self):
        """测试 e^xΓ(a+1,x) = a·e^xΓ(a,x) + x^a"""
        for a, x in ((-2.5, 0.5), (3.2, 4.0), (-7.0, 2.0), (-0.3, 0.05), (11.5, 3.0)):
            with self.subTest(a=a, x=x):
                lhs = exp_scaled_upper_gamma(a + 1.0, x).value
                term = a * exp_scaled_upper_gamma(a, x).value
                power = x ** a
                self.assertLessEqual(abs(lhs - (term + power)), 1e-11 * (abs(term) + power))


class MethodRegionTest(SimpleTestCase):
    """测试按区域选择算法"""

    def test_regions(self):
        cases = [
            (-1.0, 700.0, GammaMethod.ASYMPTOTIC),
            (0.5, 0.5, GammaMethod.SERIES),
            (-2.5, 0.5, GammaMethod.RECURRENCE),
            (-1.0, 1.0, GammaMethod.CONTINUED_FRACTION),
            (1.0, 3.0, GammaMethod.CLOSED_FORM),
        ]
        for a, x, method in cases:
            with self.subTest(a=a, x=x):
                self.assertIs(exp_scaled_upper_gamma(a, x).method_used, method)

    def test_closed_form_order_one(self):
        self.assertEqual(exp_scaled_upper_gamma(1.0, 12.0).log_value, 0.0)
        self.assertAlmostEqual(upper_incomplete_gamma(1.0, 2.0), math.exp(-2.0), places=15)


class KnownValuesTest(SimpleTestCase):
    """测试已知数值"""

    def test_gamma_minus_one_at_one(self):
        self.assertAlmostEqual(upper_incomplete_gamma(-1.0, 1.0) / 0.14849550677592204, 1.0, places=13)

    def test_scaled_gamma_minus_one(self):
        self.assertAlmostEqual(exp_scaled_upper_gamma(-1.0, 0.5).value / 1.077089, 1.0, places=5)
        self.assertAlmostEqual(exp_scaled_upper_gamma(-1.0, 700.0).value / 2.035e-6, 1.0, places=3)

    def test_half_order_is_erfc(self):
        """测试 Γ(1/2, x) = √π·erfc(√x)"""
        for x in (0.01, 0.5, 2.0, 10.0, 30.0):
            with self.subTest(x=x):
                expected = math.sqrt(math.pi) * math.erfc(math.sqrt(x))
                self.assertLess(abs(upper_incomplete_gamma(0.5, x) - expected) / expected, 1e-11)

    def test_exponential_integral(self):
        self.assertAlmostEqual(expint_e1(0.5) / 0.5597735947761608, 1.0, places=14)
        self.assertAlmostEqual(expint_e1(1.0) / 0.21938393439552029, 1.0, places=14)
        for x in (1e-6, 0.2, 3.0, 25.0, 1000.0):
            with self.subTest(x=x):
                expected = float(mp_scaled_gamma(0, x))
                self.assertLess(abs(expint_e1_scaled(x) - expected) / expected, 1e-13)

    def test_ln_gamma_matches_math(self):
        for a in (0.01, 0.3, 0.5, 1.0, 1.5, 2.0, 2.7, 9.99, 10.0, 37.2, 171.5):
            with self.subTest(a=a):
                self.assertAlmostEqual(ln_gamma(a), math.lgamma(a), delta=1e-12 * max(1.0, abs(math.lgamma(a))))


class EdgeCaseTest(SimpleTestCase):
    """测试边界输入"""

    def test_underflow_to_zero(self):
        self.assertEqual(upper_incomplete_gamma(2.0, 800.0), 0.0)
        self.assertEqual(expint_e1(800.0), 0.0)
        self.assertEqual(expint_e1(math.inf), 0.0)

    def test_overflow_raises(self):
        with self.assertRaises(SpecialFunctionError):
            upper_incomplete_gamma(-200.0, 1e-3)
        with self.assertRaises(SpecialFunctionError):
            _ = exp_scaled_upper_gamma(-200.0, 1e-3).value

    def test_invalid_arguments(self):
        for a, x in ((1.5, 0.0), (1.5, -1.0), (math.nan, 1.0), (math.inf, 1.0), (1.5, math.nan)):
            with self.subTest(a=a, x=x):
                with self.assertRaises(SpecialFunctionError):
                    exp_scaled_upper_gamma(a, x)
        with self.assertRaises(SpecialFunctionError):
            ln_gamma(0.0)
        with self.assertRaises(SpecialFunctionError):
            expint_e1(0.0)
        with self.assertRaises(SpecialFunctionError):
            expint_e1_scaled(-2.0)
