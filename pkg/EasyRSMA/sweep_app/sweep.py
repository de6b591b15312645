"""扫描入口：run_sweep 与单点检查"""
import logging
from typing import Any, Dict, Optional

from django.conf import settings

from EasyRSMA.montecarlo import check_samples, check_seed
from EasyRSMA.tasks.base_workflow import ProgressListener
from .points import dispatch_points, point_payload
from .results import SweepResult
from .scenario import Scenario, Scheme, SweepAxis
from .workflow import SweepWorkflow

logger = logging.getLogger(__name__)


def resolve_mc(
    scenario: Scenario,
    n_samples: Optional[int] = None,
    seed: Optional[int] = None,
    with_mc: Optional[bool] = None,
) -> Dict[str, Any]:
    """
    合并 MC 设置：显式参数 > 场景文件 > MONTECARLO_CONFIG (环境变量)
    """
    enabled = scenario.mc.enabled if with_mc is None else bool(with_mc)
    mc = {
        "enabled": enabled,
        "modes": [str(m) for m in scenario.mc.modes],
        "n_samples": scenario.mc.resolved_samples() if n_samples is None else n_samples,
        "seed": scenario.mc.resolved_seed() if seed is None else seed,
        "block_size": int(settings.MONTECARLO_CONFIG["block_size"]),
    }
    if enabled:
        mc["n_samples"] = check_samples(mc["n_samples"])
        mc["seed"] = check_seed(mc["seed"])
    return mc


def run_sweep(
    scenario: Scenario,
    n_samples: Optional[int] = None,
    seed: Optional[int] = None,
    with_mc: Optional[bool] = None,
    listener: Optional[ProgressListener] = None,
) -> SweepResult:
    """
    对场景的每个方案、变体、网格点计算全部请求的指标

    固定种子下结果确定；失败时抛 SweepPointError (带网格坐标)。
    """
    mc = resolve_mc(scenario, n_samples, seed, with_mc)
    logger.info(
        f"开始扫描 {scenario.name}: MC {'开启' if mc['enabled'] else '关闭'}"
        + (f", n_samples={mc['n_samples']}, seed={mc['seed']}" if mc["enabled"] else "")
    )
    workflow = SweepWorkflow(listener=listener)
    context = workflow.execute({"scenario": scenario, "mc": mc})
    return context["result"]


def run_point(
    scenario: Scenario,
    tx_power_dbm: float,
    n_samples: Optional[int] = None,
    seed: Optional[int] = None,
    with_mc: Optional[bool] = None,
) -> SweepResult:
    """
    在给定发射功率上计算场景的每个方案与变体

    扫描轴不是功率时，使用场景的基础配置 (不施加轴取值)。
    """
    mc = resolve_mc(scenario, n_samples, seed, with_mc)
    threshold = settings.SWEEP_CONFIG["approx_sinr_threshold"]
    payloads = []
    for scheme in scenario.schemes:
        for variant, system, noma in scenario.variant_configs():
            payloads.append(point_payload(
                scheme=Scheme(scheme),
                variant=variant.name,
                point_index=0,
                parameter=SweepAxis.TX_POWER_DBM,
                value=tx_power_dbm,
                tx_power_dbm=tx_power_dbm,
                system=system,
                noma=noma,
                metrics=scenario.metrics,
                mc=mc,
                approx_sinr_threshold=threshold,
            ))
    return SweepResult.from_rows(
        dispatch_points(payloads),
        scheme_order=[str(s) for s in scenario.schemes],
        variant_order=[v.name for v in scenario.variants],
    )
