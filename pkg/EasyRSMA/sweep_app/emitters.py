"""
结果输出：CSV 与矢量图

CSV：UTF-8，浮点数 %.17g (双精度可逆)，缺失值写 NA。
图：只渲染结果表，不做任何计算；matplotlib 延迟导入并使用 Agg 后端。
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple, Union

import pandas as pd

from EasyRSMA.common.errors import ConfigValidationError, EmitError
from .results import COLUMN_DTYPES, COLUMNS, SweepResult, normalize_frame
from .scenario import PlotStyle, SweepAxis

logger = logging.getLogger(__name__)

NA_MARKER = "NA"
FLOAT_FORMAT = "%.17g"

VECTOR_FORMATS = ("svg", "pdf", "eps", "ps")

# 指标族 -> 绘制的列
FAMILY_COLUMNS = {
    "rate": "closed_form_rate",
    "sum_rate": "sum_rate",
    "ee": "ee",
    "jfi": "jfi",
}
FAMILY_LABELS = {
    "rate": "Ergodic rate (bps/Hz)",
    "sum_rate": "Sum rate (bps/Hz)",
    "ee": "Energy efficiency (bps/Hz/W)",
    "jfi": "Jain's fairness index",
}
AXIS_LABELS = {
    SweepAxis.TX_POWER_DBM: "Transmit power P (dBm)",
    SweepAxis.XI: "CSIR quality ξ",
    SweepAxis.PHI: "Residual SIC factor φ",
    SweepAxis.KAPPA: "Hardware impairment level κ²",
}
DUAL_AXIS_FAMILIES = ("jfi", "sum_rate")


def emit_csv(result: SweepResult, path: Union[str, Path]) -> Path:
    """写出结果表；空结果只写表头"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        result.frame.to_csv(
            path,
            index=False,
            encoding="utf-8",
            float_format=FLOAT_FORMAT,
            na_rep=NA_MARKER,
            lineterminator="\n",
        )
    except OSError as e:
        logger.error(f"写出 CSV 失败 {path}: {e}")
        raise EmitError(f"cannot write {path}: {e}") from e
    logger.info(f"CSV 已写出: {path} ({len(result)} 行)")
    return path


def read_csv(path: Union[str, Path]) -> SweepResult:
    """读回 emit_csv 的输出，与原 SweepResult 完全相等"""
    path = Path(path)
    try:
        frame = pd.read_csv(
            path,
            encoding="utf-8",
            dtype={name: (str if dtype is object else dtype) for name, dtype in COLUMN_DTYPES.items()},
            na_values=[NA_MARKER],
            keep_default_na=False,
        )
    except OSError as e:
        raise EmitError(f"cannot read {path}: {e}") from e
    except ValueError as e:
        raise EmitError(f"malformed result file {path}: {e}") from e
    if tuple(frame.columns) != COLUMNS:
        raise EmitError(f"malformed result file {path}: unexpected header {list(frame.columns)}")
    return SweepResult(normalize_frame(frame))


@dataclass
class PlotPanel:
    """一个坐标区；双轴面板有两个指标族"""
    families: Tuple[str, ...]
    curves: List[str] = field(default_factory=list)

    @property
    def axis_groups(self) -> int:
        return len(self.families)


@dataclass
class PlotSummary:
    path: Path
    style: PlotStyle
    panels: List[PlotPanel]
    markers_only: bool


def resolve_style(result: SweepResult, style: PlotStyle) -> PlotStyle:
    style = PlotStyle(style)
    if style is PlotStyle.AUTO:
        if all(result.has_values(FAMILY_COLUMNS[f]) for f in DUAL_AXIS_FAMILIES):
            return PlotStyle.DUAL_AXIS
        return PlotStyle.PANELS
    return style


def panel_layout(result: SweepResult, style: PlotStyle) -> List[Tuple[str, ...]]:
    families = [f for f, column in FAMILY_COLUMNS.items() if result.has_values(column)]
    if style is PlotStyle.DUAL_AXIS and all(f in families for f in DUAL_AXIS_FAMILIES):
        return [DUAL_AXIS_FAMILIES] + [(f,) for f in families if f not in DUAL_AXIS_FAMILIES]
    return [(f,) for f in families]


def _curve_label(scheme: str, variant: str, labels: Mapping[str, str], single_variant: bool,
                 user: Optional[int] = None) -> str:
    parts = [scheme.upper()]
    if not single_variant:
        parts.append(labels.get(variant, variant))
    if user is not None:
        parts.append(f"D{user}")
    return " ".join(parts)


def _line_kwargs(markers_only: bool, dashed: bool = False) -> Dict[str, object]:
    if markers_only:
        return {"linestyle": "none", "marker": "o"}
    return {"linestyle": "--" if dashed else "-"}


def _draw_family(ax, result: SweepResult, family: str, labels: Mapping[str, str], markers_only: bool,
                 dashed: bool = False, tag: str = "") -> List[str]:
    curves = []
    pairs = result.curves()
    single_variant = len({variant for _, variant in pairs}) == 1
    column = FAMILY_COLUMNS[family]

    if family == "rate":
        mc_column = next((c for c in ("mc_exact_mean", "mc_approx_mean") if result.has_values(c)), None)
        for scheme, variant in pairs:
            users = sorted(result.select(scheme, variant)["user"].unique())
            for user in users:
                data = result.select(scheme, variant, int(user))
                label = _curve_label(scheme, variant, labels, single_variant, int(user))
                (line,) = ax.plot(data["value"], data[column], label=label, **_line_kwargs(markers_only, dashed))
                curves.append(label)
                if mc_column is not None:
                    # MC 结果只画标记，不进图例
                    ax.plot(data["value"], data[mc_column], linestyle="none", marker="x",
                            color=line.get_color(), label=f"_{label} MC")
        return curves

    for scheme, variant in pairs:
        data = result.system_series(scheme, variant, column)
        label = _curve_label(scheme, variant, labels, single_variant)
        if tag:
            label = f"{label} ({tag})"
        ax.plot(data["value"], data[column], label=label, **_line_kwargs(markers_only, dashed))
        curves.append(label)
    return curves


def emit_plot(
    result: SweepResult,
    path: Union[str, Path],
    style: PlotStyle = PlotStyle.AUTO,
    title: str = "",
    variant_labels: Optional[Mapping[str, str]] = None,
) -> PlotSummary:
    """
    渲染结果表为矢量图，格式由文件扩展名决定

    每个指标族一个坐标区；JFI 与和速率共用一个双 y 轴面板；
    只有一个网格点时只画标记，不连线。
    """
    path = Path(path)
    if len(result) == 0:
        raise EmitError("cannot plot an empty result")
    fmt = path.suffix.lstrip(".").lower()
    if fmt not in VECTOR_FORMATS:
        raise EmitError(f"unsupported plot format '{fmt}', expected one of {', '.join(VECTOR_FORMATS)}")
    style = resolve_style(result, style)
    if style is PlotStyle.NONE:
        raise ConfigValidationError("plot style 'none' produces no file", keys=("plot",))
    layout = panel_layout(result, style)
    if not layout:
        raise EmitError("result has no plottable metric")

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = dict(variant_labels or {})
    markers_only = result.frame["value"].nunique() == 1
    parameter = result.parameter
    try:
        x_label = AXIS_LABELS[SweepAxis(parameter)]
    except ValueError:
        x_label = parameter

    fig, axes = plt.subplots(len(layout), 1, figsize=(6.4, 3.8 * len(layout)), squeeze=False)
    panels = []
    try:
        for ax, families in zip(axes[:, 0], layout):
            panel = PlotPanel(families=families)
            ax.set_xlabel(x_label)
            ax.set_ylabel(FAMILY_LABELS[families[0]])
            ax.grid(True, alpha=0.3)
            tag = families[0] if len(families) == 2 else ""
            panel.curves += _draw_family(ax, result, families[0], labels, markers_only, tag=tag)
            handles, legend_labels = ax.get_legend_handles_labels()
            if len(families) == 2:
                right = ax.twinx()
                right.set_ylabel(FAMILY_LABELS[families[1]])
                panel.curves += _draw_family(right, result, families[1], labels, markers_only, dashed=True,
                                             tag=families[1])
                more_handles, more_labels = right.get_legend_handles_labels()
                handles += more_handles
                legend_labels += more_labels
            ax.legend(handles, legend_labels, fontsize="small", loc="best")
            panels.append(panel)
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format=fmt)
    except OSError as e:
        logger.error(f"写出图像失败 {path}: {e}")
        raise EmitError(f"cannot write {path}: {e}") from e
    finally:
        plt.close(fig)

    logger.info(f"图像已写出: {path} ({style}, {len(panels)} 个面板)")
    return PlotSummary(path=path, style=style, panels=panels, markers_only=markers_only)
