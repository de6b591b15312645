import math

import numpy as np
from django.test import SimpleTestCase
from scipy import stats as scipy_stats

from EasyRSMA.analytic import ergodic_rates, private_rate, user_common_kernel
from EasyRSMA.common.errors import ConfigValidationError
from EasyRSMA.montecarlo import (
    BatchMeans,
    McMode,
    Purpose,
    RunningMoments,
    batch_slices,
    channel_gain_blocks,
    check_samples,
    check_seed,
    mc_full_model_rate,
    mc_stream_rates,
    mc_user_rate,
    mc_user_rates,
    sample_channel_power,
    simulate_received_signal,
    standard_gamma,
    substream,
)
from EasyRSMA.montecarlo.full_model import private_component
from EasyRSMA.system_model import INFINITY, Stream, derive_link_stats, instantaneous_sinr, validate_config


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


def random_config(rng: np.random.Generator):
    n_users = int(rng.integers(2, 4))
    split = rng.dirichlet(np.ones(n_users + 1))
    return validate_config({
        "n_users": n_users,
        "beta_common": float(split[0]),
        "beta_private": tuple(float(b) for b in split[1:-1]) + (float(1.0 - split[:-1].sum()),),
        "kappa_t_sq": float(rng.uniform(0.0, 0.1)),
        "kappa_r_sq": tuple(float(k) for k in rng.uniform(0.0, 0.1, n_users)),
        "phi": tuple(float(p) for p in rng.uniform(0.0, 0.3, n_users)),
        "xi": tuple(INFINITY if rng.random() < 0.3 else float(rng.uniform(0.2, 5.0)) for _ in range(n_users)),
        "m": tuple(float(m) for m in rng.uniform(0.5, 6.0, n_users)),
        "distance_m": tuple(float(d) for d in rng.uniform(50.0, 200.0, n_users)),
        "pathloss_exp": tuple(float(t) for t in rng.uniform(2.5, 4.0, n_users)),
        "noise_dbm": -70.0,
        "circuit_power_w": 0.02,
    })


class RandomStreamTest(SimpleTestCase):
    """测试随机子流与参数校验"""

    def test_substream_is_deterministic(self):
        a = substream(42, 3, 1, 0, Purpose.CHANNEL).random(5)
        b = substream(42, 3, 1, 0, Purpose.CHANNEL).random(5)
        np.testing.assert_array_equal(a, b)

    def test_substreams_differ(self):
        base = substream(42, 3, 1, 0, Purpose.CHANNEL).random(5)
        for args in ((43, 3, 1, 0, Purpose.CHANNEL), (42, 4, 1, 0, Purpose.CHANNEL),
                     (42, 3, 0, 0, Purpose.CHANNEL), (42, 3, 1, 1, Purpose.CHANNEL),
                     (42, 3, 1, 0, Purpose.FULL_MODEL)):
            with self.subTest(args=args):
                self.assertFalse(np.array_equal(base, substream(*args).random(5)))

    def test_check_seed(self):
        self.assertEqual(check_seed(np.uint64(7)), 7)
        self.assertEqual(check_seed(2 ** 64 - 1), 2 ** 64 - 1)
        for seed in (-1, 2 ** 64, 1.5, True, "1"):
            with self.subTest(seed=seed):
                with self.assertRaises(ConfigValidationError) as ctx:
                    check_seed(seed)
                self.assertEqual(ctx.exception.keys, ("seed",))

    def test_check_samples(self):
        self.assertEqual(check_samples(1000), 1000)
        for n in (999, 0, -5, 1e6, True):
            with self.subTest(n=n):
                with self.assertRaises(ConfigValidationError):
                    check_samples(n)


class SamplerTest(SimpleTestCase):
    """测试 Gamma 采样器"""

    def test_moments(self):
        n = 200000
        for shape in (0.5, 0.7, 1.0, 2.5, 4.0):
            with self.subTest(shape=shape):
                draws = standard_gamma(shape, n, np.random.default_rng(5))
                self.assertEqual(draws.shape, (n,))
                self.assertTrue(np.all(draws > 0.0))
                self.assertLess(abs(draws.mean() - shape), 5.0 * math.sqrt(shape / n))
                # 样本方差的标准差：σ²·sqrt((2 + 6/k)/n)
                var_sd = shape * math.sqrt((2.0 + 6.0 / shape) / n)
                self.assertLess(abs(draws.var(ddof=1) - shape), 5.0 * var_sd)

    def test_distribution(self):
        for shape in (0.5, 2.5):
            with self.subTest(shape=shape):
                draws = standard_gamma(shape, 20000, np.random.default_rng(9))
                self.assertGreater(scipy_stats.kstest(draws, "gamma", args=(shape,)).pvalue, 1e-4)

    def test_channel_power(self):
        rng = np.random.default_rng(1)
        value = sample_channel_power(2.0, 3e-8, rng)
        self.assertIsInstance(value, float)
        draws = sample_channel_power(2.0, 3e-8, rng, size=100000)
        self.assertAlmostEqual(draws.mean() / 3e-8, 1.0, delta=0.02)
        with self.assertRaises(ConfigValidationError):
            sample_channel_power(0.4, 1.0, rng)
        with self.assertRaises(ConfigValidationError):
            sample_channel_power(2.0, 0.0, rng)

    def test_gain_blocks(self):
        blocks = list(channel_gain_blocks(3.0, 11, 0, 1, 2500, block_size=1000))
        self.assertEqual([b for b, _ in blocks], [0, 1, 2])
        self.assertEqual([u.size for _, u in blocks], [1000, 1000, 500])
        again = list(channel_gain_blocks(3.0, 11, 0, 1, 2500, block_size=1000))
        for (_, a), (_, b) in zip(blocks, again):
            np.testing.assert_array_equal(a, b)


class RunningMomentsTest(SimpleTestCase):
    """测试流式矩合并"""

    def test_merge_matches_numpy(self):
        values = np.random.default_rng(3).exponential(2.0, 10007)
        moments = RunningMoments()
        for chunk in np.array_split(values, 13):
            moments.update(chunk)
        self.assertEqual(moments.count, values.size)
        self.assertAlmostEqual(moments.mean, values.mean(), places=12)
        self.assertAlmostEqual(moments.variance, values.var(ddof=1), places=10)
        self.assertAlmostEqual(moments.stderr, values.std(ddof=1) / math.sqrt(values.size), places=12)

    def test_empty(self):
        moments = RunningMoments()
        moments.update(np.array([]))
        moments.merge(RunningMoments())
        self.assertEqual(moments.count, 0)
        self.assertEqual(moments.stderr, 0.0)


class BatchMeansTest(SimpleTestCase):
    """测试批均值法与切批"""

    def test_weighted_mean_and_stderr(self):
        batches = BatchMeans()
        batches.update(np.array([1.0, 1.0]))
        batches.update(np.array([3.0, 3.0, 3.0, 3.0]))
        batches.update(np.array([]))
        self.assertEqual(batches.count, 6)
        self.assertAlmostEqual(batches.mean, 14.0 / 6.0, places=14)
        # 权重 1/3, 2/3；偏差 -4/3, 2/3；k/(k-1) = 2
        self.assertAlmostEqual(batches.stderr, 8.0 / 9.0, places=14)

    def test_single_batch_has_no_stderr(self):
        batches = BatchMeans()
        batches.update(np.arange(10.0))
        self.assertEqual(batches.mean, 4.5)
        self.assertEqual(batches.stderr, 0.0)
        self.assertEqual(BatchMeans().mean, 0.0)

    def test_stderr_close_to_iid_value(self):
        values = np.random.default_rng(8).exponential(1.0, 200_000)
        batches = BatchMeans()
        for part in batch_slices(values.size, 2000):
            batches.update(values[part])
        iid = values.std(ddof=1) / math.sqrt(values.size)
        self.assertAlmostEqual(batches.mean, values.mean(), places=12)
        self.assertAlmostEqual(batches.stderr / iid, 1.0, delta=0.3)

    def test_batch_slices(self):
        self.assertEqual(batch_slices(5, None), [slice(0, 5)])
        self.assertEqual(batch_slices(2, 3), [slice(0, 2)])
        parts = batch_slices(10, 3)
        self.assertEqual([p.stop - p.start for p in parts], [3, 3, 4])
        sizes = [p.stop - p.start for p in batch_slices(131072, 15625)]
        self.assertEqual(sum(sizes), 131072)
        self.assertTrue(all(15625 <= s < 2 * 15625 for s in sizes))


class EstimatorTest(SimpleTestCase):
    """测试基于 SINR 公式的 MC 估计"""

    def setUp(self):
        self.config = table1_config(xi=(0.7, 0.7), phi=(0.1, 0.1), kappa_t_sq=0.02, kappa_r_sq=(0.03, 0.03))

    def test_fixed_seed_is_reproducible(self):
        a = mc_user_rates(self.config, 0, 15.0, 20000, seed=123)
        b = mc_user_rates(self.config, 0, 15.0, 20000, seed=123)
        c = mc_user_rates(self.config, 0, 15.0, 20000, seed=124)
        self.assertEqual(a, b)
        self.assertNotEqual(a[McMode.EXACT_LOG].mean, c[McMode.EXACT_LOG].mean)

    def test_block_size_does_not_change_sample_count(self):
        estimate = mc_user_rate(self.config, 1, 15.0, McMode.EXACT_LOG, 5000, seed=1, block_size=1024)
        self.assertEqual(estimate.n_samples, 5000)
        self.assertEqual(estimate.mode, McMode.EXACT_LOG)

    def test_topsoe_never_exceeds_exact(self):
        for power in (0.0, 15.0, 30.0):
            for user in (0, 1):
                with self.subTest(power=power, user=user):
                    both = mc_user_rates(self.config, user, power, 10000, seed=8)
                    self.assertLessEqual(both[McMode.TOPSOE_APPROX].mean, both[McMode.EXACT_LOG].mean)

    def test_stderr_scales_with_sample_count(self):
        small = mc_user_rate(self.config, 0, 20.0, McMode.EXACT_LOG, 50000, seed=2)
        large = mc_user_rate(self.config, 0, 20.0, McMode.EXACT_LOG, 200000, seed=2)
        self.assertAlmostEqual(large.stderr / small.stderr, 0.5, delta=0.05)

    def test_matches_closed_form(self):
        """测试 topsoe_approx 估计与闭式解相差不超过 4 个标准误"""
        for power in (0.0, 10.0, 20.0, 30.0):
            closed = ergodic_rates(self.config, power)
            for user in (0, 1):
                with self.subTest(power=power, user=user):
                    estimate = mc_user_rate(self.config, user, power, McMode.TOPSOE_APPROX, 200000, seed=77)
                    self.assertLess(abs(estimate.mean - closed[user].total_rate), 4.0 * estimate.stderr)

    def test_stream_estimates_match_kernels(self):
        for stream, expected in ((Stream.COMMON, user_common_kernel(self.config, 1, 12.0)),
                                 (Stream.PRIVATE, private_rate(self.config, 1, 12.0))):
            with self.subTest(stream=stream):
                estimate = mc_stream_rates(self.config, 1, 12.0, stream, 200000, seed=5)[McMode.TOPSOE_APPROX]
                self.assertLess(abs(estimate.mean - expected), 4.0 * estimate.stderr)

    def test_common_random_numbers(self):
        """测试同一种子下公共流不受 SIC 残留影响"""
        ideal_sic = self.config.with_overrides(phi=(0.0, 0.0))
        a = mc_stream_rates(self.config, 0, 20.0, Stream.COMMON, 5000, seed=4)
        b = mc_stream_rates(ideal_sic, 0, 20.0, Stream.COMMON, 5000, seed=4)
        self.assertEqual(a, b)
        pa = mc_stream_rates(self.config, 0, 20.0, Stream.PRIVATE, 5000, seed=4)[McMode.EXACT_LOG]
        pb = mc_stream_rates(ideal_sic, 0, 20.0, Stream.PRIVATE, 5000, seed=4)[McMode.EXACT_LOG]
        self.assertLess(pa.mean, pb.mean)

    def test_mean_sinr_reported(self):
        estimate = mc_user_rate(self.config, 0, 30.0, McMode.EXACT_LOG, 5000, seed=4)
        self.assertIsNotNone(estimate.mean_sinr)
        self.assertGreater(estimate.mean_sinr, 0.0)

    def test_zero_power_is_degenerate(self):
        estimate = mc_user_rate(self.config, 0, -math.inf, McMode.EXACT_LOG, 2000, seed=4)
        self.assertTrue(estimate.degenerate)
        self.assertEqual(estimate.mean, 0.0)
        self.assertEqual(estimate.stderr, 0.0)

    def test_invalid_arguments(self):
        with self.assertRaises(ConfigValidationError):
            mc_user_rate(self.config, 0, 10.0, McMode.EXACT_LOG, 500, seed=4)
        with self.assertRaises(ConfigValidationError):
            mc_user_rate(self.config, 0, 10.0, McMode.EXACT_LOG, 5000, seed=-4)
        with self.assertRaises(ConfigValidationError):
            mc_user_rate(self.config, 2, 10.0, McMode.EXACT_LOG, 5000, seed=4)
        with self.assertRaises(ValueError):
            mc_user_rate(self.config, 0, 10.0, "log2", 5000, seed=4)


class FullModelTest(SimpleTestCase):
    """测试完整接收信号仿真"""

    config = table1_config(xi=(0.5, 0.9), phi=(0.2, 0.05), kappa_t_sq=0.04, kappa_r_sq=(0.01, 0.06))

    def simulate(self, user, size=2 ** 17, seed=17):
        rng = np.random.default_rng(seed)
        link = derive_link_stats(self.config, user, 18.0)
        g_hat_sq = sample_channel_power(self.config.m[user], link.omega_hat, rng, size=size)
        return link, g_hat_sq, simulate_received_signal(self.config, user, link, g_hat_sq, rng)

    def test_power_accounting_tracks_model_variances(self):
        """测试实际分量的批内功率接近模型方差"""
        config = self.config
        for user in (0, 1):
            with self.subTest(user=user):
                link, _, signal = self.simulate(user)
                common, private = signal.stream_moments(user, config.phi[user])
                rho, err = link.rho, link.omega_err
                distortion = config.kappa_t_sq + config.kappa_r_sq[user]
                beta = config.beta_private[user]
                residual = config.phi[user] * config.beta_common
                self.assertAlmostEqual(common.signal / (rho * config.beta_common), 1.0, delta=0.02)
                self.assertAlmostEqual(common.via_estimate / (rho * (1.0 + distortion - config.beta_common)), 1.0,
                                       delta=0.02)
                self.assertAlmostEqual(common.via_error / (rho * err * (1.0 + distortion) + 1.0), 1.0, delta=0.02)
                self.assertAlmostEqual(private.signal / (rho * beta), 1.0, delta=0.02)
                self.assertAlmostEqual(
                    private.via_estimate / (rho * (residual + 1.0 - config.beta_common - beta + distortion)), 1.0,
                    delta=0.02)
                self.assertAlmostEqual(
                    private.via_error / (rho * err * (residual + 1.0 - config.beta_common + distortion) + 1.0), 1.0,
                    delta=0.02)

    def test_sinr_close_to_formula(self):
        for user in (0, 1):
            with self.subTest(user=user):
                link, g_hat_sq, signal = self.simulate(user)
                gamma_c, gamma_p = signal.decoding_sinrs(user, self.config.phi[user])
                np.testing.assert_allclose(
                    gamma_c, instantaneous_sinr(self.config, user, link, g_hat_sq, Stream.COMMON), rtol=0.03)
                np.testing.assert_allclose(
                    gamma_p, instantaneous_sinr(self.config, user, link, g_hat_sq, Stream.PRIVATE), rtol=0.03)

    def test_sinr_follows_realized_components(self):
        """测试 SINR 随实际抽到的干扰、估计误差与噪声变化"""
        user = 0
        _, _, signal = self.simulate(user, size=8192)
        base_c, base_p = signal.decoding_sinrs(user, self.config.phi[user], batch_size=1024)

        signal.transmitted[private_component(1)] = np.zeros_like(signal.transmitted[private_component(1)])
        quiet_c, quiet_p = signal.decoding_sinrs(user, self.config.phi[user], batch_size=1024)
        self.assertTrue(np.all(quiet_c > base_c))
        self.assertTrue(np.all(quiet_p > base_p))

        signal.g_err = np.zeros_like(signal.g_err)
        known_c, known_p = signal.decoding_sinrs(user, self.config.phi[user], batch_size=1024)
        self.assertTrue(np.all(known_c > quiet_c))
        self.assertTrue(np.all(known_p > quiet_p))

        signal.noise = 2.0 * signal.noise
        noisy_c, _ = signal.decoding_sinrs(user, self.config.phi[user], batch_size=1024)
        self.assertTrue(np.all(noisy_c < known_c))

    def test_sic_residual_uses_realized_common_symbols(self):
        user = 1
        _, _, signal = self.simulate(user, size=8192)
        _, perfect = signal.stream_moments(user, 0.0)
        _, residual = signal.stream_moments(user, 0.5)
        common = signal.transmitted["common"]
        rest = sum(signal.transmitted.values()) - common - signal.transmitted[private_component(user)]
        expected = 0.5 * float(np.mean(np.abs(common) ** 2)) + 2.0 * math.sqrt(0.5) * float(
            np.mean(np.real(common * np.conj(rest))))
        self.assertAlmostEqual(residual.via_estimate - perfect.via_estimate, expected,
                               delta=1e-9 * residual.via_estimate)

    def test_received_power_matches_model(self):
        config = table1_config(xi=(0.6, 0.6), kappa_t_sq=0.05, kappa_r_sq=(0.05, 0.05))
        link = derive_link_stats(config, 0, 20.0)
        rng = np.random.default_rng(23)
        g_hat_sq = sample_channel_power(config.m[0], link.omega_hat, rng, size=2 ** 17)
        signal = simulate_received_signal(config, 0, link, g_hat_sq, rng)
        self.assertEqual(signal.y.shape, (2 ** 17,))
        self.assertAlmostEqual(signal.empirical_power() / signal.expected_power(), 1.0, delta=0.03)

    def test_agrees_with_formula_estimator(self):
        """测试 20 组随机配置下两种估计在 3 个合并标准误内一致"""
        rng = np.random.default_rng(2024)
        failures = []
        for index in range(20):
            config = random_config(rng)
            user = int(rng.integers(0, config.n_users))
            power = float(rng.uniform(0.0, 30.0))
            full = mc_full_model_rate(config, user, power, 1_000_000, seed=index)
            formula = mc_user_rate(config, user, power, McMode.EXACT_LOG, 1_000_000, seed=index)
            self.assertGreater(full.stderr, 0.0)
            bound = 3.0 * math.hypot(full.stderr, formula.stderr)
            if abs(full.mean - formula.mean) > bound:
                failures.append((index, user, power, full.mean, formula.mean, bound))
        self.assertEqual(failures, [])

    def test_full_model_modes(self):
        config = table1_config(xi=(0.7, 0.7))
        exact = mc_full_model_rate(config, 1, 25.0, 5000, seed=3)
        approx = mc_full_model_rate(config, 1, 25.0, 5000, seed=3, mode=McMode.TOPSOE_APPROX)
        self.assertEqual(exact.mode, McMode.EXACT_LOG)
        self.assertLessEqual(approx.mean, exact.mean)
