"""
单个网格点的计算

每个 (方案, 变体, 网格点) 打包成一个 JSON 友好的 payload，
由 Celery 任务 EasyRSMA.tasks.evaluate_grid_point 执行 evaluate_point。
"""
import logging
import math
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence

from EasyRSMA.analytic import energy_efficiency, ergodic_rates, jains_fairness, sum_rate
from EasyRSMA.baseline_noma import NomaConfig, NomaRole, mc_noma_rates, noma_rates, validate_noma_config
from EasyRSMA.common.errors import EasyRSMAError, SweepPointError
from EasyRSMA.montecarlo import McEstimate, McMode, mc_user_rates
from EasyRSMA.system_model import SystemConfig, validate_config
from .scenario import Metric, Scheme

logger = logging.getLogger(__name__)

MC_COLUMNS = {
    McMode.TOPSOE_APPROX: ("mc_approx_mean", "mc_approx_stderr"),
    McMode.EXACT_LOG: ("mc_exact_mean", "mc_exact_stderr"),
}


def point_payload(
    scheme: Scheme,
    variant: str,
    point_index: int,
    parameter: str,
    value: float,
    tx_power_dbm: float,
    system: SystemConfig,
    noma: Optional[NomaConfig],
    metrics: Sequence[Metric],
    mc: Mapping[str, Any],
    approx_sinr_threshold: float,
) -> Dict[str, Any]:
    return {
        "scheme": str(scheme),
        "variant": variant,
        "point_index": int(point_index),
        "parameter": str(parameter),
        "value": float(value),
        "tx_power_dbm": float(tx_power_dbm),
        "system": system.model_dump(),
        "noma": noma.model_dump() if noma is not None else None,
        "metrics": [str(m) for m in metrics],
        "mc": dict(mc),
        "approx_sinr_threshold": float(approx_sinr_threshold),
    }


def point_coords(payload: Mapping[str, Any]) -> List[tuple]:
    return [
        ("scheme", payload["scheme"]),
        ("variant", payload["variant"]),
        (payload["parameter"], payload["value"]),
    ]


def _mc_estimates(payload: Mapping[str, Any], n_users: int) -> Optional[List[Dict[McMode, McEstimate]]]:
    mc = payload.get("mc") or {}
    if not mc.get("enabled") or Metric.RATE not in payload["metrics"]:
        return None
    args = dict(
        tx_power_dbm=payload["tx_power_dbm"],
        n_samples=int(mc["n_samples"]),
        seed=int(mc["seed"]),
        point_index=int(payload["point_index"]),
        block_size=int(mc["block_size"]),
    )
    if Scheme(payload["scheme"]) is Scheme.RSMA:
        system = validate_config(payload["system"])
        return [mc_user_rates(system, user, **args) for user in range(n_users)]
    noma = validate_noma_config(payload["noma"])
    return [mc_noma_rates(noma, role, **args) for role in (NomaRole.FAR, NomaRole.NEAR)]


def _system_metrics(system: SystemConfig, tx_power_dbm: float, totals: Sequence[float], metrics) -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    if Metric.SUM_RATE in metrics:
        values["sum_rate"] = sum_rate(totals)
    if Metric.EE in metrics:
        values["ee"] = energy_efficiency(system, tx_power_dbm, totals)
    if Metric.JFI in metrics:
        values["jfi"] = jains_fairness(totals)
    return values


def evaluate_point(payload: Mapping[str, Any]) -> List[Dict[str, Any]]:
    """
    计算一个网格点，返回每个用户一行 (列名见 results.COLUMNS)

    未请求的指标不出现在行里，由 SweepResult 填 NA。
    """
    scheme = Scheme(payload["scheme"])
    metrics = {Metric(m) for m in payload["metrics"]}
    tx_power_dbm = float(payload["tx_power_dbm"])

    if scheme is Scheme.RSMA:
        system = validate_config(payload["system"])
        reports = ergodic_rates(system, tx_power_dbm)
        totals = [r.total_rate for r in reports]
        splits = [(r.common_rate, r.private_rate) for r in reports]
    else:
        noma = validate_noma_config(payload["noma"])
        system = noma.system
        totals = noma_rates(noma, tx_power_dbm)
        splits = [(None, None)] * len(totals)

    estimates = _mc_estimates(payload, len(totals))
    modes = [McMode(m) for m in (payload.get("mc") or {}).get("modes", ())]
    threshold = float(payload.get("approx_sinr_threshold", math.inf))
    shared = _system_metrics(system, tx_power_dbm, totals, metrics)

    rows = []
    for user, total in enumerate(totals):
        row: Dict[str, Any] = {
            "scheme": str(scheme),
            "variant": payload["variant"],
            "user": user + 1,
            "parameter": payload["parameter"],
            "value": float(payload["value"]),
        }
        if Metric.RATE in metrics:
            common, private = splits[user]
            row.update(common_rate=common, private_rate=private, closed_form_rate=float(total))
        if estimates is not None:
            for mode in modes:
                mean_col, stderr_col = MC_COLUMNS[mode]
                row[mean_col] = float(estimates[user][mode].mean)
                row[stderr_col] = float(estimates[user][mode].stderr)
            mean_sinr = estimates[user][McMode.EXACT_LOG].mean_sinr
            row["approx_warning"] = bool(mean_sinr is not None and mean_sinr > threshold)
        row.update(shared)
        rows.append(row)

    logger.debug(
        f"网格点完成 scheme={scheme} variant={payload['variant']} "
        f"{payload['parameter']}={payload['value']}: {[round(t, 4) for t in totals]}"
    )
    return rows


def _point_error(payload: Mapping[str, Any], exc: Exception) -> SweepPointError:
    exit_code = exc.exit_code if isinstance(exc, EasyRSMAError) else 1
    return SweepPointError(f"{type(exc).__name__}: {exc}", coords=point_coords(payload), exit_code=exit_code)


def dispatch_points(
    payloads: Sequence[Mapping[str, Any]],
    progress: Optional[Callable[[int, int], None]] = None,
) -> List[Dict[str, Any]]:
    """
    把每个网格点作为 Celery 任务提交并收集结果

    eager 模式下在本进程内依次执行；否则分发到 sweep_points 队列并发执行。
    任一点失败时抛 SweepPointError，带该点坐标。
    """
    from EasyRSMA.tasks.sweep_tasks import evaluate_grid_point_task

    pending = []
    for payload in payloads:
        try:
            pending.append((payload, evaluate_grid_point_task.apply_async(args=[dict(payload)])))
        except Exception as e:
            logger.error(f"网格点提交/执行失败: {point_coords(payload)}: {e}")
            raise _point_error(payload, e) from e

    rows: List[Dict[str, Any]] = []
    for done, (payload, async_result) in enumerate(pending, start=1):
        try:
            rows.extend(async_result.get())
        except Exception as e:
            logger.error(f"网格点计算失败: {point_coords(payload)}: {e}")
            raise _point_error(payload, e) from e
        if progress is not None:
            progress(done, len(pending))
    return rows

