"""
图表复现验收：使用仓库自带的场景文件，不做任何修改

闭式解部分关闭 MC；MC 部分直接调用估计器，只取需要的网格点。
"""
from pathlib import Path

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from EasyRSMA.analytic import ergodic_rates
from EasyRSMA.montecarlo import McMode, mc_user_rate
from .scenario import load_scenario
from .sweep import run_sweep

SCENARIO_DIR = Path(settings.BASE_DIR) / "scenarios"
POWERS = tuple(range(0, 31))


def shipped(name: str):
    return load_scenario(SCENARIO_DIR / f"{name}.scenario")


def variant_system(scenario, name: str):
    for variant, system, _ in scenario.variant_configs():
        if variant.name == name:
            return system
    raise KeyError(name)


def user_series(result, scheme: str, variant: str, user: int, column: str = "closed_form_rate") -> np.ndarray:
    return result.select(scheme, variant, user)[column].to_numpy()


def system_series(result, scheme: str, variant: str, column: str) -> np.ndarray:
    return result.system_series(scheme, variant, column)[column].to_numpy()


class ClosedFormVersusMonteCarloTest(SimpleTestCase):
    """测试闭式解与 topsoe_approx MC 在 4 个标准误内一致 (10^6 样本)"""

    def test_csir_variants(self):
        scenario = shipped("fig2_csir")
        seed = int(settings.MONTECARLO_CONFIG["seed"])
        total = 0
        failures = []
        for name in ("xi_0.3", "xi_0.8", "perfect"):
            system = variant_system(scenario, name)
            for index, power in enumerate(range(0, 31, 5)):
                closed = ergodic_rates(system, float(power))
                for user in range(system.n_users):
                    estimate = mc_user_rate(system, user, float(power), McMode.TOPSOE_APPROX, 1_000_000, seed,
                                            point_index=index)
                    total += 1
                    if abs(estimate.mean - closed[user].total_rate) > 4.0 * estimate.stderr:
                        failures.append((name, power, user + 1, estimate.mean, closed[user].total_rate))
        self.assertEqual(total, 42)
        self.assertGreaterEqual(1.0 - len(failures) / total, 0.99, failures)


class CsirFigureTest(SimpleTestCase):
    """测试不完美 CSIR 图：28 dBm 处的数值与收敛"""

    def test_exact_rates_at_28_dbm(self):
        scenario = shipped("fig2_csir")
        seed = int(settings.MONTECARLO_CONFIG["seed"])
        for name in ("xi_0.3", "xi_0.8", "perfect"):
            system = variant_system(scenario, name)
            r1 = mc_user_rate(system, 0, 28.0, McMode.EXACT_LOG, 200_000, seed).mean
            r2 = mc_user_rate(system, 1, 28.0, McMode.EXACT_LOG, 200_000, seed).mean
            with self.subTest(variant=name):
                self.assertLess(abs(r1 - 2.5) / 2.5, 0.15)
                self.assertLess(abs(r2 - 1.75) / 1.75, 0.15)

    def test_curves_converge_at_28_dbm(self):
        result = run_sweep(shipped("fig2_csir"), with_mc=False)
        at_28 = result.frame[result.frame["value"] == 28.0]
        for user in (1, 2):
            rates = at_28[at_28["user"] == user]["closed_form_rate"]
            with self.subTest(user=user):
                self.assertEqual(len(rates), 3)
                self.assertLess((rates.max() - rates.min()) / rates.max(), 0.05)


class SaturationTest(SimpleTestCase):
    """测试基准配置下高功率区速率饱和"""

    def test_rate_increments(self):
        result = run_sweep(shipped("table1"), with_mc=False)
        for user in (1, 2):
            rates = user_series(result, "rsma", "base", user)
            increments = np.diff(rates)
            with self.subTest(user=user):
                self.assertTrue(np.all(increments > 0.0))
                # P ≥ 25 dBm：25→26 起每 dB 增量
                self.assertTrue(np.all(increments[25:] < 0.025), increments[25:])
                self.assertTrue(np.all(increments[26:] < 0.02), increments[26:])


class EnergyEfficiencyTest(SimpleTestCase):
    """测试 EE 曲线单峰"""

    def test_single_interior_peak(self):
        result = run_sweep(shipped("fig3_ee"), with_mc=False)
        ee = system_series(result, "rsma", "joint", "ee")
        self.assertEqual(len(ee), len(POWERS))
        peak = int(np.argmax(ee))
        self.assertTrue(0 < peak < len(ee) - 1)
        self.assertTrue(np.all(np.diff(ee[:peak + 1]) > 0.0))
        self.assertTrue(np.all(np.diff(ee[peak:]) < 0.0))

    def test_impairments_lower_efficiency(self):
        result = run_sweep(shipped("fig3_ee"), with_mc=False)
        ideal = system_series(result, "rsma", "ideal", "ee")
        for name in ("joint", "csir", "sic", "hwi"):
            with self.subTest(variant=name):
                self.assertTrue(np.all(system_series(result, "rsma", name, "ee") < ideal))


class FairnessTest(SimpleTestCase):
    """测试 RSMA 与 NOMA 的公平性与和速率"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.result = run_sweep(shipped("fig4_fairness"), with_mc=False)

    def test_rsma_is_fairer_and_faster(self):
        rsma_jfi = system_series(self.result, "rsma", "hwi", "jfi")
        noma_jfi = system_series(self.result, "noma", "hwi", "jfi")
        rsma_sum = system_series(self.result, "rsma", "hwi", "sum_rate")
        noma_sum = system_series(self.result, "noma", "hwi", "sum_rate")
        self.assertEqual(len(rsma_jfi), len(POWERS))
        self.assertTrue(np.all(rsma_jfi > noma_jfi))
        self.assertTrue(np.all(rsma_sum > noma_sum))

    def test_noma_fairness_under_impairments(self):
        impaired = system_series(self.result, "noma", "hwi", "jfi")
        ideal = system_series(self.result, "noma", "ideal_hw", "jfi")
        self.assertTrue(np.all(impaired >= ideal))

    def test_values_at_full_power(self):
        self.assertAlmostEqual(system_series(self.result, "rsma", "hwi", "sum_rate")[-1], 3.4074, delta=2e-3)
        self.assertAlmostEqual(system_series(self.result, "noma", "hwi", "sum_rate")[-1], 2.6450, delta=2e-3)
        self.assertAlmostEqual(system_series(self.result, "rsma", "hwi", "jfi")[-1], 0.9880, delta=1e-3)
        self.assertAlmostEqual(system_series(self.result, "noma", "hwi", "jfi")[-1], 0.9282, delta=1e-3)


class ComparisonTest(SimpleTestCase):
    """测试 ξ = 0.7 的 RSMA 与 ξ = 0.9 的 NOMA 在 P ≥ 19 dBm 的比较"""

    def test_rsma_at_least_noma_above_19_dbm(self):
        result = run_sweep(shipped("fig5_comparison"), with_mc=False)
        high = slice(19, None)
        rsma_far = user_series(result, "rsma", "imperfect", 1)[high]
        noma_far = user_series(result, "noma", "imperfect", 1)[high]
        self.assertTrue(np.all(rsma_far >= noma_far))
        rsma_sum = sum(user_series(result, "rsma", "imperfect", u) for u in (1, 2))[high]
        noma_sum = sum(user_series(result, "noma", "imperfect", u) for u in (1, 2))[high]
        self.assertTrue(np.all(rsma_sum >= noma_sum))

    def test_perfect_csir_helps_both_schemes(self):
        result = run_sweep(shipped("fig5_comparison"), with_mc=False)
        for scheme in ("rsma", "noma"):
            for user in (1, 2):
                with self.subTest(scheme=scheme, user=user):
                    imperfect = user_series(result, scheme, "imperfect", user)
                    perfect = user_series(result, scheme, "perfect", user)
                    self.assertTrue(np.all(imperfect < perfect))
