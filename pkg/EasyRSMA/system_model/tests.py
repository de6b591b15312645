import math
from dataclasses import replace

import numpy as np
from django.test import SimpleTestCase

from EasyRSMA.common.errors import ConfigValidationError, DegenerateChannelError
from EasyRSMA.system_model import (
    INFINITY,
    Stream,
    SystemConfig,
    derive_link_stats,
    ideal_coefficients,
    instantaneous_sinr,
    linear_snr,
    pathloss_gain,
    rsma_coefficients,
    validate_config,
)
from EasyRSMA.system_model.link_stats import dbm_to_watts


def table1_fields(**overrides):
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
    return fields


class ValidateConfigTest(SimpleTestCase):
    """测试配置校验"""

    def test_table1_config_is_valid(self):
        """测试基准配置通过校验"""
        config = validate_config(table1_fields())
        self.assertIsInstance(config, SystemConfig)
        self.assertEqual(config.beta_private, (0.25, 0.15))
        self.assertTrue(config.is_ideal(0))

    def test_instance_returned_unchanged(self):
        config = validate_config(table1_fields())
        self.assertIs(validate_config(config), config)

    def test_lists_become_tuples(self):
        config = validate_config(table1_fields(beta_private=[0.25, 0.15]))
        self.assertEqual(config.beta_private, (0.25, 0.15))

    def test_power_split_must_sum_to_one(self):
        """测试功率分配和为 1.1 时报错并指出字段"""
        with self.assertRaises(ConfigValidationError) as ctx:
            validate_config(table1_fields(beta_common=0.7))
        self.assertIn("beta_common", ctx.exception.keys)
        self.assertIn("beta_private", ctx.exception.keys)
        self.assertEqual(ctx.exception.exit_code, 4)

    def test_dimension_mismatch_names_fields(self):
        with self.assertRaises(ConfigValidationError) as ctx:
            validate_config(table1_fields(phi=(0.0,), m=(4.0, 4.0, 4.0)))
        self.assertEqual(set(ctx.exception.keys), {"phi", "m"})

    def test_out_of_range_values(self):
        cases = {
            "xi": (0.0, 1.0),
            "phi": (1.5, 0.0),
            "m": (0.4, 4.0),
            "kappa_r_sq": (-0.1, 0.0),
            "distance_m": (0.0, 120.0),
        }
        for key, value in cases.items():
            with self.subTest(key=key):
                with self.assertRaises(ConfigValidationError) as ctx:
                    validate_config(table1_fields(**{key: value}))
                self.assertIn(key, ctx.exception.keys)

    def test_unknown_field_rejected(self):
        with self.assertRaises(ConfigValidationError) as ctx:
            validate_config(table1_fields(bandwidth=1.0))
        self.assertIn("bandwidth", ctx.exception.keys)

    def test_zero_users_rejected(self):
        with self.assertRaises(ConfigValidationError):
            validate_config(table1_fields(n_users=0))

    def test_with_overrides_revalidates(self):
        config = validate_config(table1_fields())
        impaired = config.with_overrides(phi=(0.1, 0.1), kappa_t_sq=0.05)
        self.assertEqual(impaired.phi, (0.1, 0.1))
        self.assertFalse(impaired.is_ideal(0))
        self.assertEqual(config.phi, (0.0, 0.0))
        with self.assertRaises(ConfigValidationError):
            config.with_overrides(beta_common=0.9)

    def test_config_is_frozen(self):
        config = validate_config(table1_fields())
        with self.assertRaises(Exception):
            config.beta_common = 0.5


class LinkStatsTest(SimpleTestCase):
    """测试路损与 CSIR 统计量"""

    def setUp(self):
        self.config = validate_config(table1_fields(xi=(0.7, 0.7)))

    def test_pathloss_values(self):
        self.assertAlmostEqual(pathloss_gain(self.config, 0) / 2.14e-8, 1.0, delta=0.01)
        self.assertAlmostEqual(pathloss_gain(self.config, 1) / 3.28e-8, 1.0, delta=0.01)

    def test_snr_from_dbm(self):
        self.assertAlmostEqual(linear_snr(30.0, -70.0), 1e10, delta=1.0)
        self.assertEqual(linear_snr(-math.inf, -70.0), 0.0)
        self.assertAlmostEqual(dbm_to_watts(30.0), 1.0)
        self.assertEqual(dbm_to_watts(-math.inf), 0.0)

    def test_error_and_estimate_variances_add_up(self):
        for power in (0.0, 10.0, 20.0, 30.0):
            with self.subTest(power=power):
                stats = derive_link_stats(self.config, 0, power)
                self.assertAlmostEqual(
                    (stats.omega_err + stats.omega_hat) / stats.omega_total, 1.0, places=12
                )
                q = stats.rho * 0.7 * stats.omega_total
                self.assertAlmostEqual(stats.omega_err * (1.0 + q) / stats.omega_total, 1.0, places=12)

    def test_estimation_error_shrinks_with_power(self):
        errors = [derive_link_stats(self.config, 1, p).omega_err for p in range(0, 31, 5)]
        self.assertTrue(all(a > b for a, b in zip(errors, errors[1:])))

    def test_perfect_csir_has_no_error(self):
        config = validate_config(table1_fields())
        stats = derive_link_stats(config, 0, 20.0)
        self.assertEqual(stats.omega_err, 0.0)
        self.assertEqual(stats.omega_hat, stats.omega_total)

    def test_zero_power(self):
        stats = derive_link_stats(self.config, 0, -math.inf)
        self.assertEqual(stats.rho, 0.0)
        self.assertEqual(stats.omega_hat, 0.0)
        self.assertEqual(stats.omega_err, stats.omega_total)

    def test_bad_user_and_power(self):
        with self.assertRaises(ConfigValidationError):
            derive_link_stats(self.config, 2, 10.0)
        with self.assertRaises(ConfigValidationError):
            derive_link_stats(self.config, 0, math.nan)
        with self.assertRaises(ConfigValidationError):
            derive_link_stats(self.config, 0, math.inf)


class CoefficientTest(SimpleTestCase):
    """测试闭式解常数与瞬时 SINR"""

    def setUp(self):
        # 10 dBm / 0 dBm 噪声 -> ρ = 10
        self.config = validate_config(table1_fields(
            noise_dbm=0.0, kappa_t_sq=0.01, kappa_r_sq=(0.02, 0.02), phi=(0.1, 0.1)
        ))
        self.stats = derive_link_stats(self.config, 0, 10.0)

    def test_hand_computed_coefficients(self):
        coeffs = rsma_coefficients(self.config, 0, self.stats)
        self.assertAlmostEqual(coeffs.c1, 6.0)
        self.assertAlmostEqual(coeffs.a1, 4.3)
        self.assertAlmostEqual(coeffs.a2, 1.0)
        self.assertAlmostEqual(coeffs.c2, 2.5)
        self.assertAlmostEqual(coeffs.b1, 2.4)
        self.assertAlmostEqual(coeffs.b2, 1.0)
        self.assertAlmostEqual(coeffs.d1, 4.0 / self.stats.omega_hat)

    def test_error_variance_enters_a2_and_b2(self):
        config = self.config.with_overrides(xi=(0.5, 0.5))
        stats = derive_link_stats(config, 0, 10.0)
        coeffs = rsma_coefficients(config, 0, stats)
        rho_err = 10.0 * stats.omega_err
        self.assertAlmostEqual(coeffs.a2, rho_err * (1.0 + 0.03) + 1.0, places=14)
        self.assertAlmostEqual(coeffs.b2, rho_err * (0.06 + 0.4 + 0.03) + 1.0, places=14)

    def test_ideal_coefficients_match_on_ideal_config(self):
        config = validate_config(table1_fields())
        stats = derive_link_stats(config, 1, 20.0)
        self.assertEqual(ideal_coefficients(config, 1, stats), rsma_coefficients(config, 1, stats))

    def test_degenerate_channel(self):
        config = validate_config(table1_fields(xi=(0.7, 0.7)))
        stats = derive_link_stats(config, 0, -math.inf)
        with self.assertRaises(DegenerateChannelError):
            rsma_coefficients(config, 0, stats)

    def test_instantaneous_sinr(self):
        coeffs = rsma_coefficients(self.config, 0, self.stats)
        g = 1.5
        expected_common = coeffs.c1 * g / (coeffs.a1 * g + coeffs.a2)
        expected_private = coeffs.c2 * g / (coeffs.b1 * g + coeffs.b2)
        self.assertAlmostEqual(instantaneous_sinr(self.config, 0, self.stats, g, Stream.COMMON), expected_common)
        self.assertAlmostEqual(instantaneous_sinr(self.config, 0, self.stats, g, "private"), expected_private)

    def test_instantaneous_sinr_vectorized(self):
        g = np.array([0.0, 0.5, 1.0, 1e6])
        sinr = instantaneous_sinr(self.config, 0, self.stats, g, Stream.COMMON)
        self.assertEqual(sinr.shape, (4,))
        self.assertEqual(sinr[0], 0.0)
        self.assertTrue(np.all(np.diff(sinr) > 0))
        # x → ∞ 时趋于 C1/A1
        self.assertAlmostEqual(sinr[-1], 6.0 / 4.3, places=5)


def random_fields(rng: np.random.Generator):
    n_users = int(rng.integers(2, 5))
    split = rng.dirichlet(np.ones(n_users + 1))
    return table1_fields(
        n_users=n_users,
        beta_common=float(split[0]),
        beta_private=tuple(float(b) for b in split[1:-1]) + (float(1.0 - split[:-1].sum()),),
        kappa_t_sq=float(rng.uniform(0.0, 0.2)),
        kappa_r_sq=tuple(float(k) for k in rng.uniform(0.0, 0.2, n_users)),
        phi=tuple(float(p) for p in rng.uniform(0.0, 0.5, n_users)),
        xi=tuple(float(x) for x in rng.uniform(0.05, 5.0, n_users)),
        m=tuple(float(m) for m in rng.uniform(0.5, 8.0, n_users)),
        distance_m=tuple(float(d) for d in rng.uniform(20.0, 300.0, n_users)),
        pathloss_exp=tuple(float(t) for t in rng.uniform(2.0, 4.0, n_users)),
    )


class CoefficientIdentityTest(SimpleTestCase):
    """测试随机配置下常数之间的恒等式与不等式"""

    def test_identities_on_random_configs(self):
        rng = np.random.default_rng(31)
        for index in range(200):
            config = validate_config(random_fields(rng))
            user = int(rng.integers(0, config.n_users))
            power = float(rng.uniform(-10.0, 40.0))
            stats = derive_link_stats(config, user, power)
            coeffs = rsma_coefficients(config, user, stats)
            distortion = config.kappa_t_sq + config.kappa_r_sq[user]
            with self.subTest(index=index):
                self.assertLessEqual(coeffs.b1, coeffs.a1 + coeffs.c1 * (1.0 + 1e-12))
                expected = stats.rho * stats.omega_err * (1.0 + distortion)
                self.assertAlmostEqual(coeffs.a2 - 1.0, expected, delta=1e-9 * expected + 1e-15)
                self.assertLessEqual(coeffs.b2, coeffs.a2 * (1.0 + 1e-12))
                self.assertAlmostEqual(coeffs.c1, stats.rho * config.beta_common, delta=1e-12 * coeffs.c1)
                self.assertAlmostEqual(coeffs.c2, stats.rho * config.beta_private[user],
                                       delta=1e-12 * max(coeffs.c2, 1e-300))

    def test_error_variance_nonincreasing_in_xi(self):
        """测试 Ω_gne 随 ξ 单调不增，且 Ω_gne + Ω̂ = Ω"""
        rng = np.random.default_rng(32)
        xis = (0.01, 0.1, 0.5, 1.0, 3.0, 20.0, 1e3, INFINITY)
        for index in range(50):
            fields = random_fields(rng)
            power = float(rng.uniform(-10.0, 40.0))
            errors = []
            for xi in xis:
                config = validate_config(dict(fields, xi=(xi,) * fields["n_users"]))
                stats = derive_link_stats(config, 0, power)
                self.assertAlmostEqual(stats.omega_err + stats.omega_hat, stats.omega_total,
                                       delta=1e-12 * stats.omega_total)
                errors.append(stats.omega_err)
            with self.subTest(index=index, power=power):
                self.assertTrue(all(b <= a for a, b in zip(errors, errors[1:])), errors)
                self.assertEqual(errors[-1], 0.0)


class MonotoneDegradationTest(SimpleTestCase):
    """测试瞬时 SINR 随各项损伤单调不增"""

    def setUp(self):
        self.rng = np.random.default_rng(33)
        self.g = np.exp(self.rng.uniform(math.log(1e-3), math.log(1e3), 64))

    def sinrs(self, config, user, stats):
        # g 以 Ω̂ 为单位
        g = self.g * stats.omega_hat
        return (instantaneous_sinr(config, user, stats, g, Stream.COMMON),
                instantaneous_sinr(config, user, stats, g, Stream.PRIVATE))

    def assert_nonincreasing(self, before, after):
        self.assertTrue(np.all(after <= before * (1.0 + 1e-12)))

    def test_distortion_and_residual_sic(self):
        for index in range(50):
            config = validate_config(random_fields(self.rng))
            user = int(self.rng.integers(0, config.n_users))
            power = float(self.rng.uniform(0.0, 35.0))
            stats = derive_link_stats(config, user, power)
            base_c, base_p = self.sinrs(config, user, stats)
            with self.subTest(index=index, field="kappa_t_sq"):
                worse = config.with_overrides(kappa_t_sq=config.kappa_t_sq + 0.05)
                c, p = self.sinrs(worse, user, derive_link_stats(worse, user, power))
                self.assert_nonincreasing(base_c, c)
                self.assert_nonincreasing(base_p, p)
            with self.subTest(index=index, field="kappa_r_sq"):
                kappa_r = list(config.kappa_r_sq)
                kappa_r[user] += 0.05
                worse = config.with_overrides(kappa_r_sq=tuple(kappa_r))
                c, p = self.sinrs(worse, user, derive_link_stats(worse, user, power))
                self.assert_nonincreasing(base_c, c)
                self.assert_nonincreasing(base_p, p)
            with self.subTest(index=index, field="phi"):
                phi = list(config.phi)
                phi[user] = min(1.0, phi[user] + 0.1)
                worse = config.with_overrides(phi=tuple(phi))
                c, p = self.sinrs(worse, user, derive_link_stats(worse, user, power))
                np.testing.assert_array_equal(c, base_c)
                self.assert_nonincreasing(base_p, p)

    def test_error_variance(self):
        """测试固定 |ĝ|² 时 SINR 随 Ω_gne 单调不增"""
        for index in range(50):
            config = validate_config(random_fields(self.rng))
            user = int(self.rng.integers(0, config.n_users))
            stats = derive_link_stats(config, user, float(self.rng.uniform(0.0, 35.0)))
            previous = None
            for scale in (0.0, 0.5, 1.0, 2.0, 10.0):
                current = self.sinrs(config, user, replace(stats, omega_err=scale * stats.omega_total))
                if previous is not None:
                    with self.subTest(index=index, scale=scale):
                        self.assert_nonincreasing(previous[0], current[0])
                        self.assert_nonincreasing(previous[1], current[1])
                previous = current
