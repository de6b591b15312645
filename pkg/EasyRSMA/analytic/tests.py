import math

import numpy as np
from django.test import SimpleTestCase
from scipy import integrate, stats

from EasyRSMA.common.errors import DegenerateChannelError, DegenerateInputError
from EasyRSMA.analytic import (
    RateFlag,
    common_rate,
    energy_efficiency,
    ergodic_rate,
    ergodic_rates,
    exact_rate,
    fairness_report,
    ideal_ergodic_rate,
    jains_fairness,
    private_rate,
    rate_kernel,
    sum_rate,
    topsoe_rate,
    user_common_kernel,
)
from EasyRSMA.system_model import INFINITY, derive_link_stats, rsma_coefficients, validate_config


def table1_config(**overrides):
    fields = {
        "n_users": 2,
        "beta_common": 0.6,
        "beta_private": (0.25, 0.15),
        "kappa_t_sq": 0.0,
        "kappa_r_sq": (0.0, 0.0),
        "phi": (0.0, 0.0),
        "xi": (INFINITY, INFINITY),
        "m": (4.0, 4.0),
        "distance_m": (135.0, 120.0),
        "pathloss_exp": (3.6, 3.6),
        "pathloss_ref": 1.0,
        "noise_dbm": -70.0,
        "circuit_power_w": 0.02,
    }
    fields.update(overrides)
    return validate_config(fields)


def quad_kernel(c, a1, a2, m, d1):
    """E[topsoe(γ)]，x = t/d1，t ~ Gamma(m, 1)"""
    def integrand(t):
        sinr = c * t / (a1 * t + a2 * d1)
        return float(topsoe_rate(sinr)) * stats.gamma.pdf(t, m)
    value, _ = integrate.quad(integrand, 0.0, math.inf, epsabs=0.0, epsrel=1e-11, limit=400)
    return value


class RateKernelTest(SimpleTestCase):
    """测试速率核闭式解"""

    def test_known_value(self):
        self.assertAlmostEqual(rate_kernel(2.0, 1.0, 1.0, 1.0, 1.0), 0.77696, places=5)

    def test_against_quadrature(self):
        """测试 200 组随机参数与数值积分一致"""
        rng = np.random.default_rng(11)
        failures = []
        for _ in range(200):
            m = float(rng.uniform(0.5, 8.0))
            d1 = m / float(10.0 ** rng.uniform(-1.0, 1.0))
            c = float(10.0 ** rng.uniform(-2.0, 2.0))
            a1 = float(rng.uniform(0.0, 10.0))
            a2 = float(rng.uniform(1.0, 10.0))
            got = rate_kernel(c, a1, a2, m, d1)
            expected = quad_kernel(c, a1, a2, m, d1)
            if abs(got - expected) > 1e-7 * expected:
                failures.append((c, a1, a2, m, d1, got, expected))
        self.assertEqual(failures, [])

    def test_realistic_scale(self):
        """测试 d1 ~ 1e8 的实际场景参数"""
        config = table1_config(xi=(0.7, 0.7), kappa_t_sq=0.05, kappa_r_sq=(0.05, 0.05), phi=(0.1, 0.1))
        for power in (0.0, 12.0, 30.0):
            for user in (0, 1):
                link = derive_link_stats(config, user, power)
                coeffs = rsma_coefficients(config, user, link)
                for terms in (coeffs.common_terms(link.m), coeffs.private_terms(link.m)):
                    with self.subTest(power=power, user=user, terms=terms):
                        self.assertGreater(terms.d1, 1e7)
                        expected = quad_kernel(*terms)
                        self.assertLess(abs(rate_kernel(*terms) - expected) / expected, 1e-7)

    def test_bounded_by_ceiling(self):
        """测试期望速率不超过 SINR 上限 c/a1 对应的速率"""
        for c, a1, a2, m, d1 in ((6e8, 4e8, 1.0, 4.0, 1.9e8), (10.0, 0.5, 2.0, 1.0, 3.0), (1.0, 2.0, 1.0, 0.5, 0.1)):
            ceiling = float(topsoe_rate(c / a1))
            self.assertLess(rate_kernel(c, a1, a2, m, d1), ceiling)

    def test_zero_signal(self):
        self.assertEqual(rate_kernel(0.0, 1.0, 1.0, 2.0, 5.0), 0.0)

    def test_degenerate_channel(self):
        for d1 in (0.0, -1.0, math.inf, math.nan):
            with self.subTest(d1=d1):
                with self.assertRaises(DegenerateChannelError):
                    rate_kernel(1.0, 1.0, 1.0, 2.0, d1)

    def test_out_of_range_terms(self):
        for args in ((-1.0, 1.0, 1.0, 2.0, 1.0), (1.0, 1.0, 0.5, 2.0, 1.0), (1.0, 1.0, 1.0, 0.2, 1.0),
                     (math.inf, 1.0, 1.0, 2.0, 1.0)):
            with self.subTest(args=args):
                with self.assertRaises(DegenerateInputError):
                    rate_kernel(*args)

    def test_topsoe_below_exact(self):
        sinr = np.array([0.0, 0.1, 1.0, 10.0, 1e4])
        self.assertTrue(np.all(topsoe_rate(sinr) <= exact_rate(sinr) + 1e-15))
        self.assertAlmostEqual(float(exact_rate(1.0)), 1.0)
        self.assertAlmostEqual(float(topsoe_rate(2.0)), 1.0 / math.log(2.0))


class ErgodicRateTest(SimpleTestCase):
    """测试各用户遍历速率"""

    def test_ideal_path_matches_general_path(self):
        config = table1_config()
        for power in range(0, 31, 5):
            for user in (0, 1):
                with self.subTest(power=power, user=user):
                    general = ergodic_rate(config, user, float(power))
                    ideal = ideal_ergodic_rate(config, user, float(power))
                    self.assertAlmostEqual(general.total_rate, ideal.total_rate, delta=1e-12)
                    self.assertEqual(general.flags, frozenset({RateFlag.IDEAL}))

    def test_common_rate_is_min_over_users(self):
        config = table1_config(xi=(0.7, 0.3))
        kernels = [user_common_kernel(config, n, 20.0) for n in range(2)]
        self.assertEqual(common_rate(config, 20.0), min(kernels))
        reports = ergodic_rates(config, 20.0)
        self.assertEqual(reports[0].common_rate, reports[1].common_rate)
        for report in reports:
            self.assertAlmostEqual(report.total_rate, report.common_rate + report.private_rate, places=14)
            self.assertEqual(report.private_rate, private_rate(config, report.user, 20.0))

    def test_perfect_csir_values(self):
        """测试理想情况下 30 dBm 的速率"""
        reports = ergodic_rates(table1_config(), 30.0)
        self.assertAlmostEqual(reports[0].total_rate, 2.5085, delta=2e-3)
        self.assertAlmostEqual(reports[1].total_rate, 1.8834, delta=2e-3)

    def test_imperfect_csir_values(self):
        reports = ergodic_rates(table1_config(xi=(0.3, 0.3)), 28.0)
        self.assertAlmostEqual(reports[0].total_rate, 2.3790, delta=2e-3)
        self.assertAlmostEqual(reports[1].total_rate, 1.8034, delta=2e-3)

    def test_rates_increase_with_power(self):
        config = table1_config(xi=(0.7, 0.7))
        for user in (0, 1):
            rates = [ergodic_rate(config, user, float(p)).total_rate for p in range(0, 31)]
            self.assertTrue(all(a < b for a, b in zip(rates, rates[1:])))

    def test_impairments_reduce_rates(self):
        ideal = ergodic_rates(table1_config(), 20.0)
        for overrides, flag in (
            ({"xi": (0.5, 0.5)}, RateFlag.IMPERFECT_CSIR),
            ({"kappa_t_sq": 0.05}, RateFlag.HW_IMPAIRED),
            ({"kappa_r_sq": (0.05, 0.05)}, RateFlag.HW_IMPAIRED),
        ):
            with self.subTest(overrides=overrides):
                impaired = ergodic_rates(table1_config(**overrides), 20.0)
                for a, b in zip(impaired, ideal):
                    self.assertLess(a.total_rate, b.total_rate)
                    self.assertIn(flag, a.flags)

    def test_residual_sic_only_hurts_private_stream(self):
        ideal = ergodic_rates(table1_config(), 20.0)
        sic = ergodic_rates(table1_config(phi=(0.1, 0.1)), 20.0)
        for a, b in zip(sic, ideal):
            self.assertEqual(a.common_rate, b.common_rate)
            self.assertLess(a.private_rate, b.private_rate)
            self.assertEqual(a.flags, frozenset({RateFlag.IMPERFECT_SIC}))

    def assert_monotone(self, grid, build, increasing):
        for power in (0.0, 10.0, 20.0, 30.0):
            rates = np.array([[r.total_rate for r in ergodic_rates(build(v), power)] for v in grid])
            steps = np.diff(rates, axis=0)
            with self.subTest(power=power):
                if increasing:
                    self.assertTrue(np.all(steps >= -1e-9), steps)
                else:
                    self.assertTrue(np.all(steps <= 1e-9), steps)

    def test_rates_nondecreasing_in_xi(self):
        xis = (0.05, 0.2, 0.5, 1.0, 3.0, 10.0, 100.0, INFINITY)
        self.assert_monotone(xis, lambda xi: table1_config(xi=(xi, xi)), increasing=True)
        self.assert_monotone(
            xis, lambda xi: table1_config(xi=(xi, xi), phi=(0.1, 0.1), kappa_t_sq=0.05, kappa_r_sq=(0.05, 0.05)),
            increasing=True)

    def test_rates_nonincreasing_in_impairments(self):
        """测试速率随 φ、κ_t²、κ_r² 单调不增"""
        grid = (0.0, 0.01, 0.05, 0.1, 0.2, 0.5)
        self.assert_monotone(grid, lambda v: table1_config(xi=(0.7, 0.7), phi=(v, v)), increasing=False)
        self.assert_monotone(grid, lambda v: table1_config(xi=(0.7, 0.7), kappa_t_sq=v), increasing=False)
        self.assert_monotone(grid, lambda v: table1_config(xi=(0.7, 0.7), kappa_r_sq=(v, v)), increasing=False)
        self.assert_monotone(grid, lambda v: table1_config(kappa_t_sq=v, kappa_r_sq=(v, v), phi=(v, v)),
                             increasing=False)

    def test_zero_power(self):
        config = table1_config(xi=(0.7, 0.7))
        for report in ergodic_rates(config, -math.inf):
            self.assertEqual(report.total_rate, 0.0)
        self.assertEqual(ergodic_rate(config, 1, -math.inf).total_rate, 0.0)
        self.assertEqual(ideal_ergodic_rate(config, 0, -math.inf).total_rate, 0.0)


class MetricsTest(SimpleTestCase):
    """测试和速率、EE 与 JFI"""

    def test_jains_fairness(self):
        self.assertEqual(jains_fairness([1.0, 1.0]), 1.0)
        self.assertAlmostEqual(jains_fairness([1.0, 0.0]), 0.5)
        self.assertAlmostEqual(jains_fairness([2.0, 1.0]), 0.9)
        self.assertAlmostEqual(jains_fairness([3.0, 1.0, 0.0, 0.0]), 16.0 / 40.0)
        self.assertAlmostEqual(jains_fairness([20.0, 10.0]), jains_fairness([2.0, 1.0]))

    def test_jains_fairness_bounds_on_random_vectors(self):
        """测试随机非负速率向量的 JFI 落在 [1/N, 1] 且与定义一致"""
        rng = np.random.default_rng(41)
        for index in range(500):
            n = int(rng.integers(1, 9))
            rates = rng.exponential(1.0, n) * (rng.random(n) < 0.8)
            if not rates.any():
                rates[0] = 1.0
            jfi = jains_fairness(rates.tolist())
            with self.subTest(index=index, rates=rates.tolist()):
                self.assertGreaterEqual(jfi, 1.0 / n)
                self.assertLessEqual(jfi, 1.0)
                self.assertAlmostEqual(jfi, rates.sum() ** 2 / (n * np.sum(rates ** 2)), places=12)
                self.assertAlmostEqual(jains_fairness((3.7 * rates).tolist()), jfi, places=12)
        self.assertAlmostEqual(jains_fairness([0.0, 0.0, 5.0]), 1.0 / 3.0, places=15)
        self.assertEqual(jains_fairness([2.5] * 6), 1.0)

    def test_jains_fairness_degenerate(self):
        for rates in ([], [0.0, 0.0], [1.0, -0.5], [1.0, math.nan]):
            with self.subTest(rates=rates):
                with self.assertRaises(DegenerateInputError):
                    jains_fairness(rates)

    def test_energy_efficiency(self):
        config = table1_config()
        # 0 dBm = 1 mW
        self.assertAlmostEqual(energy_efficiency(config, 0.0, [1.0, 2.0]), 3.0 / 0.021)
        self.assertEqual(energy_efficiency(config, 0.0, [0.0, 0.0]), 0.0)
        self.assertEqual(energy_efficiency(config, -math.inf), 0.0)

    def test_fairness_report_consistent(self):
        config = table1_config(xi=(0.7, 0.7), phi=(0.1, 0.1))
        report = fairness_report(config, 15.0)
        rates = ergodic_rates(config, 15.0)
        self.assertAlmostEqual(report.sum_rate, sum_rate(rates))
        self.assertAlmostEqual(report.jfi, jains_fairness(rates))
        self.assertAlmostEqual(report.ee, sum_rate(rates) / (10 ** -1.5 + 0.02))
        self.assertTrue(0.5 <= report.jfi <= 1.0)

    def test_energy_efficiency_peaks_at_moderate_power(self):
        config = table1_config()
        ee = [energy_efficiency(config, float(p)) for p in range(0, 31)]
        self.assertTrue(10 <= int(np.argmax(ee)) <= 16)
        self.assertLess(ee[30], ee[int(np.argmax(ee))])
