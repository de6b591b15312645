import math

from django.test import SimpleTestCase

from EasyRSMA.analytic import topsoe_rate
from EasyRSMA.baseline_noma import (
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
from EasyRSMA.common.errors import ConfigValidationError, DegenerateChannelError
from EasyRSMA.montecarlo import McMode
from EasyRSMA.system_model import INFINITY, validate_config


def system_fields(**overrides):
    fields = {
        "n_users": 2,
        "beta_common": 0.6,
        "beta_private": (0.25, 0.15),
        "kappa_t_sq": 0.05,
        "kappa_r_sq": (0.05, 0.05),
        "phi": (0.1, 0.1),
        "xi": (INFINITY, INFINITY),
        "m": (4.0, 4.0),
        "distance_m": (135.0, 120.0),
        "pathloss_exp": (3.6, 3.6),
        "pathloss_ref": 1.0,
        "noise_dbm": -70.0,
        "circuit_power_w": 0.02,
    }
    fields.update(overrides)
    return fields


def noma_config(alpha_far=0.55, xi=None, **system_overrides):
    return validate_noma_config({
        "system": validate_config(system_fields(**system_overrides)),
        "alpha_far": alpha_far,
        "xi": xi,
    })


class NomaConfigTest(SimpleTestCase):
    """测试 NOMA 配置校验"""

    def test_valid(self):
        config = noma_config()
        self.assertAlmostEqual(config.alpha_near, 0.45)
        self.assertIs(config.effective_system, config.system)

    def test_far_user_needs_more_power(self):
        for alpha in (0.4, 0.5, 0.0, 1.0, 1.2):
            with self.subTest(alpha=alpha):
                with self.assertRaises(ConfigValidationError) as ctx:
                    noma_config(alpha_far=alpha)
                self.assertIn("alpha_far", ctx.exception.keys)

    def test_exactly_two_users(self):
        with self.assertRaises(ConfigValidationError) as ctx:
            noma_config(
                n_users=3, beta_private=(0.2, 0.1, 0.1), kappa_r_sq=(0.0, 0.0, 0.0), phi=(0.0, 0.0, 0.0),
                xi=(INFINITY,) * 3, m=(4.0,) * 3, distance_m=(135.0, 120.0, 100.0), pathloss_exp=(3.6,) * 3,
            )
        self.assertIn("n_users", ctx.exception.keys)

    def test_xi_override(self):
        config = noma_config(xi=(0.9, 0.9))
        self.assertEqual(config.effective_system.xi, (0.9, 0.9))
        self.assertEqual(config.system.xi, (INFINITY, INFINITY))
        with self.assertRaises(ConfigValidationError):
            noma_config(xi=(0.9,))
        with self.assertRaises(ConfigValidationError):
            noma_config(xi=(0.9, 0.0))


class NomaSinrTest(SimpleTestCase):
    """测试 NOMA 瞬时 SINR"""

    def setUp(self):
        # 10 dBm / 0 dBm 噪声 -> ρ = 10；κ² = 0.1
        self.config = noma_config(alpha_far=0.6, noise_dbm=0.0)

    def test_hand_computed_values(self):
        far = noma_stats(self.config, NomaRole.FAR, 10.0)
        near = noma_stats(self.config, NomaRole.NEAR, 10.0)
        # 6 / (10·(0.4 + 0.1) + 1)
        self.assertAlmostEqual(noma_sinr(self.config, NomaRole.FAR, 1.0, far), 1.0)
        # 4 / (10·(0.1·0.6 + 0.1) + 1)
        self.assertAlmostEqual(noma_sinr(self.config, "near", 1.0, near), 4.0 / 2.6)
        self.assertEqual(noma_sinr(self.config, NomaRole.FAR, 0.0, far), 0.0)

    def test_estimation_error_terms(self):
        config = noma_config(alpha_far=0.6, noise_dbm=0.0, xi=(0.5, 0.5))
        stats = noma_stats(config, NomaRole.NEAR, 10.0)
        self.assertGreater(stats.omega_err, 0.0)
        terms = noma_coefficients(config, NomaRole.NEAR, stats)
        rho_err = 10.0 * stats.omega_err
        self.assertAlmostEqual(terms.a2, rho_err * (0.06 + 0.4 + 0.1) + 1.0, places=14)
        self.assertAlmostEqual(terms.d1, 4.0 / stats.omega_hat)

    def test_power_must_match_stats(self):
        stats = noma_stats(self.config, NomaRole.FAR, 10.0)
        self.assertAlmostEqual(noma_sinr(self.config, NomaRole.FAR, 1.0, stats, tx_power_dbm=10.0), 1.0)
        with self.assertRaises(ConfigValidationError) as ctx:
            noma_sinr(self.config, NomaRole.FAR, 1.0, stats, tx_power_dbm=11.0)
        self.assertEqual(ctx.exception.keys, ("tx_power_dbm",))

    def test_degenerate_channel(self):
        config = noma_config(xi=(0.5, 0.5))
        stats = noma_stats(config, NomaRole.FAR, -math.inf)
        with self.assertRaises(DegenerateChannelError):
            noma_coefficients(config, NomaRole.FAR, stats)


class NomaRateTest(SimpleTestCase):
    """测试 NOMA 遍历速率"""

    def test_fairness_scenario_values(self):
        """测试 30 dBm 下的远/近用户速率"""
        far, near = noma_rates(noma_config(), 30.0)
        self.assertAlmostEqual(far, 0.9546, delta=2e-3)
        self.assertAlmostEqual(near, 1.6904, delta=2e-3)

    def test_far_user_ceiling(self):
        """测试高 SNR 下远用户 SINR 趋于 α_f/α_n"""
        config = noma_config(alpha_far=0.6, kappa_t_sq=0.0, kappa_r_sq=(0.0, 0.0))
        ceiling = float(topsoe_rate(0.6 / 0.4))
        rate = noma_ergodic_rate(config, NomaRole.FAR, 60.0)
        self.assertLess(rate, ceiling)
        self.assertGreater(rate, 0.99 * ceiling)

    def test_zero_power(self):
        self.assertEqual(noma_rates(noma_config(xi=(0.5, 0.5)), -math.inf), [0.0, 0.0])

    def test_better_csir_helps(self):
        imperfect = noma_rates(noma_config(xi=(0.5, 0.5)), 20.0)
        perfect = noma_rates(noma_config(), 20.0)
        for a, b in zip(imperfect, perfect):
            self.assertLess(a, b)

    def test_mc_matches_closed_form(self):
        config = noma_config(xi=(0.8, 0.8))
        for role in NomaRole:
            with self.subTest(role=role):
                estimate = mc_noma_rate(config, role, 18.0, McMode.TOPSOE_APPROX, 200000, seed=31)
                closed = noma_ergodic_rate(config, role, 18.0)
                self.assertLess(abs(estimate.mean - closed), 4.0 * estimate.stderr)

    def test_mc_modes_and_reproducibility(self):
        config = noma_config()
        a = mc_noma_rates(config, NomaRole.NEAR, 25.0, 10000, seed=6)
        b = mc_noma_rates(config, NomaRole.NEAR, 25.0, 10000, seed=6)
        self.assertEqual(a, b)
        self.assertLessEqual(a[McMode.TOPSOE_APPROX].mean, a[McMode.EXACT_LOG].mean)
        with self.assertRaises(ConfigValidationError):
            mc_noma_rates(config, NomaRole.NEAR, 25.0, 10, seed=6)
