"""
场景文件解析

INI 风格的类型化键值文件，节：
    [system]            SystemConfig 字段，每用户字段写成逗号分隔列表
    [noma]              alpha_far, xi (可选，覆盖 NOMA 的 CSIR 质量)
    [sweep]             axis, start, stop, step, tx_power_dbm, schemes, metrics
    [montecarlo]        enabled, n_samples, seed, modes
    [output]            title, plot, plot_format
    [variant.<name>]    label 以及任意 system 字段 / noma.<字段> 覆盖

ξ 的完美 CSIR 写作 `inf`。未知节、未知键都是错误。
"""
import configparser
import logging
import math
import re
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, Union

from django.conf import settings

from EasyRSMA.baseline_noma import NomaConfig, validate_noma_config
from EasyRSMA.common.errors import ConfigValidationError, EmitError, ScenarioParseError
from EasyRSMA.montecarlo import McMode
from EasyRSMA.system_model import SystemConfig, validate_config

logger = logging.getLogger(__name__)

SCENARIO_SUFFIX = ".scenario"
GRID_DECIMALS = 12
GRID_SLACK = 1e-9


class SweepAxis(StrEnum):
    TX_POWER_DBM = "tx_power_dbm"
    XI = "xi"
    PHI = "phi"
    KAPPA = "kappa"


class Metric(StrEnum):
    RATE = "rate"
    SUM_RATE = "sum_rate"
    EE = "ee"
    JFI = "jfi"


class Scheme(StrEnum):
    RSMA = "rsma"
    NOMA = "noma"


class PlotStyle(StrEnum):
    AUTO = "auto"
    DUAL_AXIS = "dual_axis"
    PANELS = "panels"
    NONE = "none"


@dataclass(frozen=True)
class McSettings:
    enabled: bool = True
    n_samples: Optional[int] = None
    seed: Optional[int] = None
    modes: Tuple[McMode, ...] = (McMode.TOPSOE_APPROX, McMode.EXACT_LOG)

    def resolved_samples(self) -> int:
        if self.n_samples is not None:
            return self.n_samples
        return int(settings.MONTECARLO_CONFIG["n_samples"])

    def resolved_seed(self) -> int:
        if self.seed is not None:
            return self.seed
        return int(settings.MONTECARLO_CONFIG["seed"])


@dataclass(frozen=True)
class Variant:
    """一族曲线，例如 ξ = 0.3 / 0.8 / inf"""
    name: str
    label: str = ""
    system_overrides: Mapping[str, Any] = field(default_factory=dict)
    noma_overrides: Mapping[str, Any] = field(default_factory=dict)

    @property
    def display_label(self) -> str:
        return self.label or self.name

    def apply(self, system: SystemConfig, noma: Optional[NomaConfig]) -> Tuple[SystemConfig, Optional[NomaConfig]]:
        try:
            if self.system_overrides:
                system = system.with_overrides(**self.system_overrides)
            if noma is not None:
                data = {"system": system, "alpha_far": noma.alpha_far, "xi": noma.xi}
                data.update(self.noma_overrides)
                noma = validate_noma_config(data)
        except ConfigValidationError as e:
            raise ConfigValidationError(f"variant '{self.name}': {e.message}", keys=e.keys) from None
        return system, noma


BASE_VARIANT = Variant(name="base")


def apply_axis(
    axis: SweepAxis,
    value: float,
    system: SystemConfig,
    noma: Optional[NomaConfig],
    fixed_tx_power_dbm: Optional[float],
) -> Tuple[SystemConfig, Optional[NomaConfig], float]:
    """
    把扫描轴取值写入配置，返回 (system, noma, 发射功率 dBm)

    kappa 轴同时设置 κ_t² 与所有用户的 κ_rn²；xi、phi 轴设置所有用户。
    xi 轴会取消 NOMA 自带的 xi 覆盖。
    """
    axis = SweepAxis(axis)
    if axis is SweepAxis.TX_POWER_DBM:
        return system, noma, float(value)

    n = system.n_users
    if axis is SweepAxis.XI:
        system = system.with_overrides(xi=(value,) * n)
    elif axis is SweepAxis.PHI:
        system = system.with_overrides(phi=(value,) * n)
    else:
        system = system.with_overrides(kappa_t_sq=value, kappa_r_sq=(value,) * n)

    if noma is not None:
        xi = None if axis is SweepAxis.XI else noma.xi
        noma = validate_noma_config({"system": system, "alpha_far": noma.alpha_far, "xi": xi})
    return system, noma, float(fixed_tx_power_dbm)


@dataclass(frozen=True)
class Scenario:
    name: str
    system: SystemConfig
    axis: SweepAxis
    start: float
    stop: float
    step: float
    noma: Optional[NomaConfig] = None
    fixed_tx_power_dbm: Optional[float] = None
    variants: Tuple[Variant, ...] = (BASE_VARIANT,)
    mc: McSettings = field(default_factory=McSettings)
    metrics: Tuple[Metric, ...] = (Metric.RATE,)
    schemes: Tuple[Scheme, ...] = (Scheme.RSMA,)
    plot: PlotStyle = PlotStyle.AUTO
    plot_format: str = "svg"
    title: str = ""
    source: str = ""

    def grid(self) -> List[float]:
        """start, start+step, ..., ≤ stop"""
        count = int(math.floor((self.stop - self.start) / self.step + GRID_SLACK)) + 1
        return [round(self.start + i * self.step, GRID_DECIMALS) for i in range(count)]

    def variant_configs(self) -> List[Tuple[Variant, SystemConfig, Optional[NomaConfig]]]:
        configs = []
        for variant in self.variants:
            system, noma = variant.apply(self.system, self.noma)
            configs.append((variant, system, noma))
        return configs

    def point_configs(
        self, system: SystemConfig, noma: Optional[NomaConfig], value: float
    ) -> Tuple[SystemConfig, Optional[NomaConfig], float]:
        return apply_axis(self.axis, value, system, noma, self.fixed_tx_power_dbm)

    def validate(self) -> "Scenario":
        """检查扫描范围、指标、方案，并把每个网格点的配置都校验一遍"""
        if not math.isfinite(self.step) or self.step <= 0.0:
            raise ConfigValidationError(f"sweep step must be positive, got {self.step}", keys=("step",))
        if not (math.isfinite(self.start) and math.isfinite(self.stop)) or self.stop < self.start:
            raise ConfigValidationError(
                f"empty sweep grid: start={self.start}, stop={self.stop}", keys=("start", "stop")
            )
        if not self.metrics:
            raise ConfigValidationError("at least one metric must be requested", keys=("metrics",))
        if not self.schemes:
            raise ConfigValidationError("at least one scheme must be requested", keys=("schemes",))
        if Scheme.NOMA in self.schemes and self.noma is None:
            raise ConfigValidationError("scheme 'noma' requested but no [noma] section", keys=("schemes", "noma"))
        if self.axis is not SweepAxis.TX_POWER_DBM and self.fixed_tx_power_dbm is None:
            raise ConfigValidationError(
                f"sweep over {self.axis} needs a fixed tx_power_dbm", keys=("tx_power_dbm",)
            )
        names = [v.name for v in self.variants]
        if len(set(names)) != len(names):
            raise ConfigValidationError("duplicate variant names", keys=("variant",))

        grid = self.grid()
        for variant, system, noma in self.variant_configs():
            for value in grid:
                try:
                    self.point_configs(system, noma, value)
                except ConfigValidationError as e:
                    raise ConfigValidationError(
                        f"variant '{variant.name}' at {self.axis}={value}: {e.message}", keys=e.keys
                    ) from None
        return self


# ---------------------------------------------------------------------------
# 值解析

def _parse_float(text: str) -> float:
    value = float(text)
    if math.isnan(value):
        raise ValueError("nan is not allowed")
    return value


def _parse_int(text: str) -> int:
    return int(text)


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in configparser.ConfigParser.BOOLEAN_STATES:
        return configparser.ConfigParser.BOOLEAN_STATES[lowered]
    raise ValueError(f"not a boolean: {text!r}")


def _split(text: str) -> List[str]:
    items = [item.strip() for item in text.split(",")]
    if any(not item for item in items):
        raise ValueError("empty list item")
    return items


def _parse_float_list(text: str) -> Tuple[float, ...]:
    return tuple(_parse_float(item) for item in _split(text))


def _enum_list(enum_cls) -> Callable[[str], tuple]:
    def parse(text: str) -> tuple:
        return tuple(enum_cls(item) for item in _split(text))
    return parse


def _parse_text(text: str) -> str:
    return text


SYSTEM_KEYS: Dict[str, Callable[[str], Any]] = {
    "n_users": _parse_int,
    "beta_common": _parse_float,
    "beta_private": _parse_float_list,
    "kappa_t_sq": _parse_float,
    "kappa_r_sq": _parse_float_list,
    "phi": _parse_float_list,
    "xi": _parse_float_list,
    "m": _parse_float_list,
    "distance_m": _parse_float_list,
    "pathloss_exp": _parse_float_list,
    "pathloss_ref": _parse_float,
    "noise_dbm": _parse_float,
    "circuit_power_w": _parse_float,
}

NOMA_KEYS: Dict[str, Callable[[str], Any]] = {
    "alpha_far": _parse_float,
    "xi": _parse_float_list,
}

SWEEP_KEYS: Dict[str, Callable[[str], Any]] = {
    "axis": SweepAxis,
    "start": _parse_float,
    "stop": _parse_float,
    "step": _parse_float,
    "tx_power_dbm": _parse_float,
    "schemes": _enum_list(Scheme),
    "metrics": _enum_list(Metric),
}

MONTECARLO_KEYS: Dict[str, Callable[[str], Any]] = {
    "enabled": _parse_bool,
    "n_samples": _parse_int,
    "seed": _parse_int,
    "modes": _enum_list(McMode),
}

OUTPUT_KEYS: Dict[str, Callable[[str], Any]] = {
    "title": _parse_text,
    "plot": PlotStyle,
    "plot_format": _parse_text,
}

VARIANT_PREFIX = "variant."
NOMA_OVERRIDE_PREFIX = "noma."

SECTIONS = {
    "system": SYSTEM_KEYS,
    "noma": NOMA_KEYS,
    "sweep": SWEEP_KEYS,
    "montecarlo": MONTECARLO_KEYS,
    "output": OUTPUT_KEYS,
}
REQUIRED_SECTIONS = ("system", "sweep")

_SECTION_RE = re.compile(r"^\[(?P<name>[^\]]*)\]")
_OPTION_RE = re.compile(r"^(?P<key>[^=:]+?)\s*[=:]\s*(?P<value>.*)$")

Position = Tuple[int, int]


def _index_positions(text: str) -> Dict[Tuple[str, Optional[str]], Position]:
    """(节, 键) -> (行, 列)，列指向值的起始位置；键为 None 时指向节头"""
    positions: Dict[Tuple[str, Optional[str]], Position] = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in "#;" or line[0].isspace():
            continue
        match = _SECTION_RE.match(line)
        if match:
            section = match.group("name").strip()
            positions[(section, None)] = (lineno, 1)
            continue
        match = _OPTION_RE.match(line)
        if match and section is not None:
            positions[(section, match.group("key").strip())] = (lineno, match.start("value") + 1)
    return positions


class _SectionReader:
    """逐键读取一个节，并把值错误定位到行列"""

    def __init__(self, path: str, section: str, items: Mapping[str, str], positions):
        self.path = path
        self.section = section
        self.items = dict(items)
        self.positions = positions

    def error(self, message: str, key: Optional[str] = None) -> ScenarioParseError:
        line, column = self.positions.get((self.section, key), self.positions.get((self.section, None), (None, None)))
        return ScenarioParseError(message, path=self.path, line=line, column=column)

    def check_known(self, known) -> None:
        for key in self.items:
            if key not in known:
                raise self.error(f"unknown key '{key}' in [{self.section}]", key)

    def parse(self, key: str, parser: Callable[[str], Any]) -> Any:
        raw = self.items[key]
        if raw == "":
            raise self.error(f"[{self.section}] {key}: missing value", key)
        try:
            return parser(raw)
        except ValueError as e:
            raise self.error(f"[{self.section}] {key}: cannot parse {raw!r} ({e})", key) from None

    def parse_all(self, table: Mapping[str, Callable[[str], Any]]) -> Dict[str, Any]:
        self.check_known(table)
        return {key: self.parse(key, table[key]) for key in self.items}


def _new_parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(
        interpolation=None,
        comment_prefixes=("#", ";"),
        inline_comment_prefixes=("#",),
        default_section="__no_defaults__",
        empty_lines_in_values=False,
    )
    parser.optionxform = str
    return parser


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise EmitError(f"cannot read scenario file {path}: {e}") from e


def _parse_ini(text: str, path: str) -> configparser.ConfigParser:
    parser = _new_parser()
    try:
        parser.read_string(text, source=path)
    except configparser.MissingSectionHeaderError as e:
        raise ScenarioParseError("key outside of any [section]", path=path, line=e.lineno, column=1) from None
    except configparser.DuplicateSectionError as e:
        raise ScenarioParseError(f"duplicate section [{e.section}]", path=path, line=e.lineno, column=1) from None
    except configparser.DuplicateOptionError as e:
        raise ScenarioParseError(
            f"duplicate key '{e.option}' in [{e.section}]", path=path, line=e.lineno, column=1
        ) from None
    except configparser.ParsingError as e:
        lineno, line = e.errors[0]
        raise ScenarioParseError(f"malformed line {line!r}", path=path, line=lineno, column=1) from None
    return parser


def _parse_variant(reader: _SectionReader, name: str) -> Variant:
    label = ""
    system_overrides: Dict[str, Any] = {}
    noma_overrides: Dict[str, Any] = {}
    for key in reader.items:
        if key == "label":
            label = reader.parse(key, _parse_text)
        elif key.startswith(NOMA_OVERRIDE_PREFIX) and key[len(NOMA_OVERRIDE_PREFIX):] in NOMA_KEYS:
            short = key[len(NOMA_OVERRIDE_PREFIX):]
            noma_overrides[short] = reader.parse(key, NOMA_KEYS[short])
        elif key in SYSTEM_KEYS and key != "n_users":
            system_overrides[key] = reader.parse(key, SYSTEM_KEYS[key])
        else:
            raise reader.error(f"unknown key '{key}' in [{reader.section}]", key)
    return Variant(name=name, label=label, system_overrides=system_overrides, noma_overrides=noma_overrides)


def parse_scenario_text(text: str, path: str = "<scenario>", name: str = "scenario") -> Scenario:
    """解析场景文本；语法错误抛 ScenarioParseError，不变量错误抛 ConfigValidationError"""
    if not text.strip() or all(
        not line.strip() or line.strip()[0] in "#;" for line in text.splitlines()
    ):
        raise ScenarioParseError("scenario file is empty", path=path, line=1, column=1)

    parser = _parse_ini(text, path)
    positions = _index_positions(text)

    parsed: Dict[str, Dict[str, Any]] = {}
    variants: List[Variant] = []
    for section in parser.sections():
        reader = _SectionReader(path, section, parser.items(section), positions)
        if section in SECTIONS:
            parsed[section] = reader.parse_all(SECTIONS[section])
        elif section.startswith(VARIANT_PREFIX) and section[len(VARIANT_PREFIX):].strip():
            variants.append(_parse_variant(reader, section[len(VARIANT_PREFIX):].strip()))
        else:
            raise reader.error(f"unknown section [{section}]")

    for section in REQUIRED_SECTIONS:
        if section not in parsed:
            raise ScenarioParseError(f"missing required section [{section}]", path=path, line=1, column=1)

    system = validate_config(parsed["system"])

    noma = None
    if "noma" in parsed:
        noma_fields = dict(parsed["noma"])
        if "alpha_far" not in noma_fields:
            raise ConfigValidationError("[noma] needs alpha_far", keys=("alpha_far",))
        noma = validate_noma_config({"system": system, **noma_fields})

    sweep = parsed["sweep"]
    missing = [key for key in ("axis", "start", "stop", "step") if key not in sweep]
    if missing:
        raise ConfigValidationError("[sweep] is incomplete", keys=missing)

    mc_fields = parsed.get("montecarlo", {})
    mc = McSettings(
        enabled=mc_fields.get("enabled", True),
        n_samples=mc_fields.get("n_samples"),
        seed=mc_fields.get("seed"),
        modes=mc_fields.get("modes", McSettings.modes),
    )

    output = parsed.get("output", {})
    scenario = Scenario(
        name=name,
        system=system,
        noma=noma,
        axis=sweep["axis"],
        start=sweep["start"],
        stop=sweep["stop"],
        step=sweep["step"],
        fixed_tx_power_dbm=sweep.get("tx_power_dbm"),
        variants=tuple(variants) or (BASE_VARIANT,),
        mc=mc,
        metrics=sweep.get("metrics", (Metric.RATE,)),
        schemes=sweep.get("schemes", (Scheme.RSMA,)),
        plot=output.get("plot", PlotStyle.AUTO),
        plot_format=output.get("plot_format", settings.SWEEP_CONFIG["plot_format"]).lower(),
        title=output.get("title", ""),
        source=path,
    )
    return scenario.validate()


def load_scenario(path: Union[str, Path]) -> Scenario:
    """
    读取并校验场景文件

    Raises:
        ScenarioParseError: 语法错误、未知节/键、值无法解析 (带行列号)
        ConfigValidationError: 不变量不满足，keys 给出出错字段
        EmitError: 文件无法读取
    """
    path = Path(path)
    text = _read_text(path)
    scenario = parse_scenario_text(text, path=str(path), name=path.stem)
    logger.info(
        f"场景 {scenario.name} 加载完成: axis={scenario.axis}, {len(scenario.grid())} 个网格点, "
        f"{len(scenario.variants)} 个变体, schemes={','.join(scenario.schemes)}"
    )
    return scenario


def resolve_scenario_path(name_or_path: Union[str, Path]) -> Path:
    """接受文件路径，或 SWEEP_CONFIG['scenario_dir'] 下的场景名"""
    path = Path(name_or_path)
    if path.exists():
        return path
    candidate = Path(settings.SWEEP_CONFIG["scenario_dir"]) / path.name
    if candidate.suffix != SCENARIO_SUFFIX:
        candidate = candidate.with_name(candidate.name + SCENARIO_SUFFIX)
    return candidate if candidate.exists() else path
