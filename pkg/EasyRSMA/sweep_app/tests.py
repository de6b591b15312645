import math
import subprocess
import tempfile
from io import StringIO
from pathlib import Path
from unittest.mock import patch

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from EasyRSMA.common.errors import (
    ConfigValidationError,
    DegenerateChannelError,
    EmitError,
    ScenarioParseError,
    SweepPointError,
)
from EasyRSMA.montecarlo import McMode
from .emitters import emit_csv, emit_plot, read_csv
from .results import COLUMNS, SweepResult
from .scenario import (
    Metric,
    PlotStyle,
    Scheme,
    SweepAxis,
    load_scenario,
    parse_scenario_text,
    resolve_scenario_path,
)
from .sweep import resolve_mc, run_point, run_sweep

SCENARIO_DIR = Path(settings.BASE_DIR) / "scenarios"
SHIPPED = ("table1", "fig2_csir", "fig3_sic_hi", "fig3_ee", "fig4_fairness", "fig5_comparison")

# 行号：1 [system] ... 12 noise_dbm, 14 [sweep] ... 18 step
BASE_TEXT = """[system]
n_users = 2
beta_common = 0.6
beta_private = 0.25, 0.15
kappa_t_sq = 0
kappa_r_sq = 0, 0
phi = 0, 0
xi = inf, inf
m = 4, 4
distance_m = 135, 120
pathloss_exp = 3.6, 3.6
noise_dbm = -70

[sweep]
axis = tx_power_dbm
start = 0
stop = 30
step = 1
"""

NOMA_SECTION = """
[noma]
alpha_far = 0.55
"""


def shipped(name: str):
    return load_scenario(SCENARIO_DIR / f"{name}.scenario")


def scenario_text(**replacements) -> str:
    text = BASE_TEXT
    for old, new in replacements.items():
        text = text.replace(old, new)
    return text


class ScenarioParseTest(SimpleTestCase):
    """测试场景文件解析"""

    def test_shipped_scenarios_are_valid(self):
        for name in SHIPPED:
            with self.subTest(name=name):
                scenario = shipped(name)
                self.assertEqual(scenario.name, name)
                self.assertEqual(len(scenario.grid()), 31)

    def test_minimal_scenario_defaults(self):
        scenario = parse_scenario_text(BASE_TEXT)
        self.assertIs(scenario.axis, SweepAxis.TX_POWER_DBM)
        self.assertEqual(scenario.metrics, (Metric.RATE,))
        self.assertEqual(scenario.schemes, (Scheme.RSMA,))
        self.assertEqual([v.name for v in scenario.variants], ["base"])
        self.assertTrue(scenario.mc.enabled)
        self.assertEqual(scenario.plot_format, "svg")
        self.assertEqual(scenario.system.xi, (math.inf, math.inf))

    def test_power_split_error_names_fields(self):
        """测试功率分配和为 1.1 时报参数校验错误"""
        with self.assertRaises(ConfigValidationError) as ctx:
            parse_scenario_text(BASE_TEXT.replace("beta_common = 0.6", "beta_common = 0.7"))
        self.assertIn("beta_common", ctx.exception.keys)
        self.assertIn("beta_private", ctx.exception.keys)
        self.assertEqual(ctx.exception.exit_code, 4)

    def test_empty_file(self):
        for text in ("", "   \n\n", "# 只有注释\n; 以及这一行\n"):
            with self.subTest(text=text):
                with self.assertRaises(ScenarioParseError) as ctx:
                    parse_scenario_text(text, path="empty.scenario")
                self.assertEqual((ctx.exception.line, ctx.exception.column), (1, 1))
                self.assertEqual(ctx.exception.exit_code, 3)
                self.assertTrue(str(ctx.exception).startswith("empty.scenario:1:1"))

    def test_unknown_key_position(self):
        text = BASE_TEXT.replace("noise_dbm = -70\n", "noise_dbm = -70\nbandwidth = 5\n")
        with self.assertRaises(ScenarioParseError) as ctx:
            parse_scenario_text(text)
        self.assertEqual((ctx.exception.line, ctx.exception.column), (13, 13))
        self.assertIn("bandwidth", str(ctx.exception))

    def test_bad_value_position(self):
        with self.assertRaises(ScenarioParseError) as ctx:
            parse_scenario_text(BASE_TEXT.replace("m = 4, 4", "m = 4, abc"))
        self.assertEqual((ctx.exception.line, ctx.exception.column), (9, 5))

    def test_missing_value(self):
        with self.assertRaises(ScenarioParseError) as ctx:
            parse_scenario_text(BASE_TEXT.replace("phi = 0, 0", "phi ="))
        self.assertEqual(ctx.exception.line, 7)

    def test_nan_rejected(self):
        with self.assertRaises(ScenarioParseError):
            parse_scenario_text(BASE_TEXT.replace("xi = inf, inf", "xi = nan, inf"))

    def test_unknown_section(self):
        with self.assertRaises(ScenarioParseError) as ctx:
            parse_scenario_text(BASE_TEXT + "\n[plotting]\nx = 1\n")
        self.assertEqual((ctx.exception.line, ctx.exception.column), (20, 1))

    def test_structural_errors(self):
        cases = {
            "key before section": ("n = 1\n" + BASE_TEXT, 1),
            "duplicate key": (BASE_TEXT.replace("n_users = 2\n", "n_users = 2\nn_users = 2\n"), 3),
            "missing sweep": (BASE_TEXT.split("[sweep]")[0], 1),
        }
        for label, (text, line) in cases.items():
            with self.subTest(label=label):
                with self.assertRaises(ScenarioParseError) as ctx:
                    parse_scenario_text(text)
                self.assertEqual(ctx.exception.line, line)

    def test_invariant_errors(self):
        cases = {
            ("step",): BASE_TEXT.replace("step = 1", "step = 0"),
            ("start", "stop"): BASE_TEXT.replace("stop = 30", "stop = -1"),
            ("schemes", "noma"): BASE_TEXT + "schemes = rsma, noma\n",
            ("tx_power_dbm",): BASE_TEXT.replace("axis = tx_power_dbm", "axis = xi").replace("start = 0", "start = 0.1"),
            ("phi",): BASE_TEXT.replace("axis = tx_power_dbm", "axis = phi").replace("stop = 30", "stop = 2")
                      + "tx_power_dbm = 20\n",
            ("n_users",): BASE_TEXT.replace("[sweep]", NOMA_SECTION.strip() + "\n\n[sweep]")
                          .replace("n_users = 2", "n_users = 3")
                          .replace("beta_private = 0.25, 0.15", "beta_private = 0.2, 0.1, 0.1")
                          .replace("kappa_r_sq = 0, 0", "kappa_r_sq = 0, 0, 0")
                          .replace("phi = 0, 0", "phi = 0, 0, 0")
                          .replace("xi = inf, inf", "xi = inf, inf, inf")
                          .replace("m = 4, 4", "m = 4, 4, 4")
                          .replace("distance_m = 135, 120", "distance_m = 135, 120, 100")
                          .replace("pathloss_exp = 3.6, 3.6", "pathloss_exp = 3.6, 3.6, 3.6"),
        }
        for keys, text in cases.items():
            with self.subTest(keys=keys):
                with self.assertRaises(ConfigValidationError) as ctx:
                    parse_scenario_text(text)
                for key in keys:
                    self.assertIn(key, ctx.exception.keys)

    def test_unknown_enum_value(self):
        with self.assertRaises(ScenarioParseError) as ctx:
            parse_scenario_text(BASE_TEXT + "metrics = rate, capacity\n")
        self.assertEqual(ctx.exception.line, 19)

    def test_variants(self):
        text = BASE_TEXT + "schemes = rsma, noma\n" + NOMA_SECTION + """
[variant.low]
label = ξ = 0.3
xi = 0.3, 0.3
noma.alpha_far = 0.7

[variant.high]
xi = 0.8, 0.8
"""
        scenario = parse_scenario_text(text)
        self.assertEqual([v.name for v in scenario.variants], ["low", "high"])
        self.assertEqual(scenario.variants[0].display_label, "ξ = 0.3")
        self.assertEqual(scenario.variants[1].display_label, "high")
        (low, low_system, low_noma), (_, high_system, high_noma) = scenario.variant_configs()
        self.assertEqual(low_system.xi, (0.3, 0.3))
        self.assertEqual(low_noma.alpha_far, 0.7)
        self.assertEqual(low_noma.system.xi, (0.3, 0.3))
        self.assertEqual(high_system.xi, (0.8, 0.8))
        self.assertEqual(high_noma.alpha_far, 0.55)

    def test_bad_variant(self):
        with self.assertRaises(ScenarioParseError):
            parse_scenario_text(BASE_TEXT + "\n[variant.x]\nn_users = 3\n")
        with self.assertRaises(ConfigValidationError) as ctx:
            parse_scenario_text(BASE_TEXT + "\n[variant.x]\nbeta_common = 0.9\n")
        self.assertIn("variant 'x'", str(ctx.exception))

    def test_grid(self):
        scenario = parse_scenario_text(
            BASE_TEXT.replace("axis = tx_power_dbm", "axis = xi").replace("stop = 30", "stop = 1")
            .replace("step = 1", "step = 0.1").replace("start = 0", "start = 0.1") + "tx_power_dbm = 20\n"
        )
        self.assertEqual(scenario.grid(), [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0])
        system, _, power = scenario.point_configs(scenario.system, None, 0.3)
        self.assertEqual(system.xi, (0.3, 0.3))
        self.assertEqual(power, 20.0)

    def test_kappa_axis_sets_all_distortions(self):
        scenario = parse_scenario_text(
            BASE_TEXT.replace("axis = tx_power_dbm", "axis = kappa").replace("stop = 30", "stop = 0.1")
            .replace("step = 1", "step = 0.05") + "tx_power_dbm = 20\n"
        )
        system, _, _ = scenario.point_configs(scenario.system, None, 0.05)
        self.assertEqual(system.kappa_t_sq, 0.05)
        self.assertEqual(system.kappa_r_sq, (0.05, 0.05))

    def test_missing_file(self):
        with self.assertRaises(EmitError) as ctx:
            load_scenario(SCENARIO_DIR / "does_not_exist.scenario")
        self.assertEqual(ctx.exception.exit_code, 6)

    def test_resolve_by_name(self):
        self.assertEqual(resolve_scenario_path("fig2_csir"), SCENARIO_DIR / "fig2_csir.scenario")
        self.assertEqual(resolve_scenario_path("fig2_csir.scenario"), SCENARIO_DIR / "fig2_csir.scenario")


class SweepRunTest(SimpleTestCase):
    """测试扫描执行与结果表"""

    def test_closed_form_sweep(self):
        result = run_sweep(shipped("fig2_csir"), with_mc=False)
        # 3 个变体 × 31 个点 × 2 个用户
        self.assertEqual(len(result), 186)
        first = result.frame.iloc[0]
        self.assertEqual((first["scheme"], first["variant"], first["user"], first["value"]), ("rsma", "xi_0.3", 1, 0.0))
        self.assertEqual(result.curves(), [("rsma", "xi_0.3"), ("rsma", "xi_0.8"), ("rsma", "perfect")])
        frame = result.frame
        self.assertTrue(((frame["common_rate"] + frame["private_rate"] - frame["closed_form_rate"]).abs() < 1e-12).all())
        self.assertFalse(result.has_values("mc_exact_mean"))
        self.assertFalse(result.has_values("jfi"))
        self.assertTrue(frame["approx_warning"].isna().all())

    def test_table_rows(self):
        result = run_sweep(shipped("table1"), with_mc=False)
        self.assertEqual(len(result), 62)
        for column in ("sum_rate", "ee", "jfi"):
            self.assertTrue(result.has_values(column))
        at_ten = result.frame[result.frame["value"] == 10.0]
        self.assertEqual(at_ten["sum_rate"].nunique(), 1)
        self.assertAlmostEqual(at_ten["sum_rate"].iloc[0], at_ten["closed_form_rate"].sum(), places=12)

    def test_mc_sweep_is_reproducible(self):
        scenario = parse_scenario_text(BASE_TEXT.replace("stop = 30", "stop = 20").replace("step = 1", "step = 10"))
        first = run_sweep(scenario, n_samples=2000, seed=99)
        second = run_sweep(scenario, n_samples=2000, seed=99)
        self.assertTrue(first.equals(second))
        self.assertTrue(result_has_mc(first))
        frame = first.frame
        self.assertTrue((frame["mc_approx_mean"] <= frame["mc_exact_mean"]).all())
        self.assertFalse(frame["approx_warning"].isna().any())

    def test_mc_modes_subset(self):
        scenario = parse_scenario_text(
            BASE_TEXT.replace("stop = 30", "stop = 0") + "\n[montecarlo]\nmodes = exact_log\nn_samples = 1000\n"
        )
        result = run_sweep(scenario)
        self.assertTrue(result.has_values("mc_exact_mean"))
        self.assertFalse(result.has_values("mc_approx_mean"))

    def test_noma_rows(self):
        result = run_sweep(shipped("fig4_fairness"), with_mc=False)
        noma = result.select("noma", "hwi")
        self.assertEqual(len(noma), 62)
        self.assertTrue(noma["common_rate"].isna().all())
        self.assertTrue(noma["jfi"].between(0.5, 1.0).all())

    @override_settings(MONTECARLO_CONFIG={"n_samples": 5000, "seed": 7, "block_size": 1024})
    def test_mc_defaults_from_settings(self):
        mc = resolve_mc(shipped("fig2_csir"))
        self.assertEqual((mc["n_samples"], mc["seed"], mc["block_size"]), (5000, 7, 1024))
        self.assertEqual(mc["modes"], [McMode.TOPSOE_APPROX, McMode.EXACT_LOG])
        mc = resolve_mc(shipped("fig2_csir"), n_samples=3000, seed=1)
        self.assertEqual((mc["n_samples"], mc["seed"]), (3000, 1))
        self.assertFalse(resolve_mc(shipped("fig2_csir"), with_mc=False)["enabled"])

    def test_mc_settings_validated(self):
        with self.assertRaises(ConfigValidationError):
            resolve_mc(shipped("fig2_csir"), n_samples=10)
        with self.assertRaises(ConfigValidationError):
            resolve_mc(shipped("fig2_csir"), seed=-1)
        # MC 关闭时不检查
        self.assertFalse(resolve_mc(shipped("fig2_csir"), n_samples=10, with_mc=False)["enabled"])

    def test_point_error_carries_coordinates(self):
        scenario = shipped("fig4_fairness")
        with patch("EasyRSMA.sweep_app.points.evaluate_point", side_effect=DegenerateChannelError("zero variance")):
            with self.assertRaises(SweepPointError) as ctx:
                run_sweep(scenario, with_mc=False)
        self.assertEqual(ctx.exception.coords, {"scheme": "rsma", "variant": "hwi", "tx_power_dbm": 0.0})
        self.assertEqual(ctx.exception.exit_code, 5)

    def test_run_point(self):
        result = run_point(shipped("fig5_comparison"), 19.0, with_mc=False)
        self.assertEqual(len(result), 8)
        self.assertEqual(set(result.frame["value"]), {19.0})
        self.assertEqual(result.curves(), [("rsma", "imperfect"), ("rsma", "perfect"),
                                           ("noma", "imperfect"), ("noma", "perfect")])

    def test_result_ordering_ignores_row_order(self):
        rows = [
            {"scheme": "noma", "variant": "a", "user": 1, "parameter": "tx_power_dbm", "value": 1.0},
            {"scheme": "rsma", "variant": "b", "user": 2, "parameter": "tx_power_dbm", "value": 0.0},
            {"scheme": "rsma", "variant": "a", "user": 1, "parameter": "tx_power_dbm", "value": 1.0},
            {"scheme": "rsma", "variant": "a", "user": 1, "parameter": "tx_power_dbm", "value": 0.0},
        ]
        result = SweepResult.from_rows(rows, scheme_order=["rsma", "noma"], variant_order=["a", "b"])
        ordered = list(result.frame[["scheme", "variant", "value"]].itertuples(index=False, name=None))
        self.assertEqual(ordered, [("rsma", "a", 0.0), ("rsma", "a", 1.0), ("rsma", "b", 0.0), ("noma", "a", 1.0)])
        self.assertTrue(result.equals(SweepResult.from_rows(reversed(rows), ["rsma", "noma"], ["a", "b"])))
        with self.assertRaises(ValueError):
            SweepResult.from_rows([{"bogus": 1}])


def result_has_mc(result: SweepResult) -> bool:
    return result.has_values("mc_exact_mean") and result.has_values("mc_approx_mean")


class EmitterTest(SimpleTestCase):
    """测试 CSV 与图像输出"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_csv_round_trip(self):
        scenario = parse_scenario_text(BASE_TEXT.replace("step = 1", "step = 15"))
        result = run_sweep(scenario, n_samples=1000, seed=5)
        path = emit_csv(result, self.out / "a" / "run.csv")
        again = read_csv(path)
        self.assertTrue(again.equals(result))
        second = emit_csv(again, self.out / "run2.csv")
        self.assertEqual(path.read_bytes(), second.read_bytes())
        header = path.read_text(encoding="utf-8").splitlines()[0]
        self.assertEqual(header, ",".join(COLUMNS))

    def test_missing_values_marked(self):
        result = run_sweep(shipped("fig4_fairness"), with_mc=False)
        text = emit_csv(result, self.out / "fig4.csv").read_text(encoding="utf-8")
        self.assertIn(",NA,", text)
        self.assertTrue(read_csv(self.out / "fig4.csv").equals(result))

    def test_empty_result_writes_header_only(self):
        path = emit_csv(SweepResult.empty(), self.out / "empty.csv")
        self.assertEqual(path.read_text(encoding="utf-8"), ",".join(COLUMNS) + "\n")
        self.assertEqual(len(read_csv(path)), 0)

    def test_malformed_csv(self):
        path = self.out / "bad.csv"
        path.write_text("scheme,user\nrsma,1\n", encoding="utf-8")
        with self.assertRaises(EmitError):
            read_csv(path)
        with self.assertRaises(EmitError):
            read_csv(self.out / "missing.csv")

    def test_rate_panels(self):
        scenario = shipped("fig2_csir")
        result = run_sweep(scenario, with_mc=False)
        summary = emit_plot(result, self.out / "fig2.svg", style=scenario.plot,
                            variant_labels={v.name: v.display_label for v in scenario.variants})
        self.assertIs(summary.style, PlotStyle.PANELS)
        self.assertEqual(len(summary.panels), 1)
        self.assertEqual(len(summary.panels[0].curves), 6)
        self.assertIn("RSMA ξ = 0.3 D1", summary.panels[0].curves)
        self.assertFalse(summary.markers_only)
        self.assertTrue(summary.path.read_text(encoding="utf-8").lstrip().startswith("<?xml"))

    def test_dual_axis(self):
        result = run_sweep(shipped("fig4_fairness"), with_mc=False)
        summary = emit_plot(result, self.out / "fig4.pdf")
        self.assertIs(summary.style, PlotStyle.DUAL_AXIS)
        self.assertEqual(len(summary.panels), 1)
        panel = summary.panels[0]
        self.assertEqual(panel.families, ("jfi", "sum_rate"))
        self.assertEqual(panel.axis_groups, 2)
        self.assertEqual(len(panel.curves), 8)
        self.assertTrue(summary.path.read_bytes().startswith(b"%PDF"))

    def test_single_point_uses_markers(self):
        scenario = parse_scenario_text(BASE_TEXT.replace("start = 0", "start = 10").replace("stop = 30", "stop = 10"))
        result = run_sweep(scenario, with_mc=False)
        summary = emit_plot(result, self.out / "point.svg")
        self.assertTrue(summary.markers_only)

    def test_plot_errors(self):
        result = run_sweep(parse_scenario_text(BASE_TEXT.replace("step = 1", "step = 30")), with_mc=False)
        with self.assertRaises(EmitError):
            emit_plot(result, self.out / "plot.png")
        with self.assertRaises(EmitError):
            emit_plot(SweepResult.empty(), self.out / "plot.svg")
        with self.assertRaises(ConfigValidationError):
            emit_plot(result, self.out / "plot.svg", style=PlotStyle.NONE)


class CommandTest(SimpleTestCase):
    """测试管理命令"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write_scenario(self, text: str) -> str:
        path = self.out / "case.scenario"
        path.write_text(text, encoding="utf-8")
        return str(path)

    def test_validate(self):
        stdout = StringIO()
        call_command("validate", "fig2_csir", stdout=stdout)
        output = stdout.getvalue()
        self.assertIn("Variants: xi_0.3, xi_0.8, perfect", output)
        self.assertIn("31 points", output)

    def test_validate_exit_codes(self):
        cases = (
            (BASE_TEXT.replace("beta_common = 0.6", "beta_common = 0.7"), 4),
            (BASE_TEXT + "bogus = 1\n", 3),
        )
        for text, code in cases:
            with self.subTest(code=code):
                with self.assertRaises(CommandError) as ctx:
                    call_command("validate", self.write_scenario(text), stdout=StringIO())
                self.assertEqual(ctx.exception.returncode, code)
        with self.assertRaises(CommandError) as ctx:
            call_command("validate", str(self.out / "nope.scenario"), stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 6)

    def test_sweep_writes_outputs(self):
        stdout = StringIO()
        call_command("sweep", "table1", "--no-mc", "--out", str(self.out), stdout=stdout)
        self.assertTrue((self.out / "table1.csv").exists())
        self.assertTrue((self.out / "table1.svg").exists())
        self.assertEqual(len(read_csv(self.out / "table1.csv")), 62)
        self.assertIn("table1", stdout.getvalue())

    def test_sweep_without_plot(self):
        call_command("sweep", self.write_scenario(BASE_TEXT), "--no-mc", "--no-plot", "--out", str(self.out),
                     stdout=StringIO())
        self.assertTrue((self.out / "case.csv").exists())
        self.assertFalse((self.out / "case.svg").exists())

    def test_sweep_reports_point_failure(self):
        with patch("EasyRSMA.sweep_app.points.evaluate_point", side_effect=DegenerateChannelError("zero variance")):
            with self.assertRaises(CommandError) as ctx:
                call_command("sweep", "table1", "--no-mc", "--out", str(self.out), stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 5)
        self.assertIn("tx_power_dbm=0.0", str(ctx.exception))

    def test_point(self):
        stdout = StringIO()
        call_command("point", "fig5_comparison", "--power", "19", "--no-mc", stdout=stdout)
        output = stdout.getvalue()
        self.assertIn("P = 19 dBm", output)
        self.assertIn("noma", output)
        self.assertIn("closed_form_rate", output)
        self.assertNotIn("mc_exact_mean", output)

    def test_start_sweep_worker(self):
        with patch("EasyRSMA.sweep_app.management.commands.start_sweep_worker.subprocess.run") as mock_run:
            call_command("start_sweep_worker", "--concurrency", "2", stdout=StringIO())
        mock_run.assert_called_once_with([
            "celery", "-A", "EasyRSMA.celery_app", "worker", "--loglevel=info", "--concurrency=2",
            "--queues=sweep_points", "--hostname=sweep@%h",
        ], check=True)

    def test_start_sweep_worker_failure(self):
        error = subprocess.CalledProcessError(1, ["celery"])
        with patch("EasyRSMA.sweep_app.management.commands.start_sweep_worker.subprocess.run", side_effect=error):
            with self.assertRaises(SystemExit) as ctx:
                call_command("start_sweep_worker", stdout=StringIO())
        self.assertEqual(ctx.exception.code, 1)
