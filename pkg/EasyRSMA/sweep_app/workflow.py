"""参数扫描工作流的三个步骤"""
from typing import Dict, Any, List
import logging

from django.conf import settings

from EasyRSMA.tasks.base_workflow import BaseWorkflow, WorkflowStep
from .points import dispatch_points, point_payload
from .results import SweepResult
from .scenario import Scenario

logger = logging.getLogger(__name__)


class BuildGridStep(WorkflowStep):
    """展开 方案 × 变体 × 网格点，生成任务 payload"""

    def execute(self, context: Dict[str, Any]) -> Dict[str, Any]:
        scenario: Scenario = context["scenario"]
        mc = context["mc"]
        threshold = settings.SWEEP_CONFIG["approx_sinr_threshold"]
        grid = scenario.grid()

        payloads = []
        for scheme in scenario.schemes:
            for variant, system, noma in scenario.variant_configs():
                for index, value in enumerate(grid):
                    point_system, point_noma, tx_power_dbm = scenario.point_configs(system, noma, value)
                    payloads.append(point_payload(
                        scheme=scheme,
                        variant=variant.name,
                        point_index=index,
                        parameter=scenario.axis,
                        value=value,
                        tx_power_dbm=tx_power_dbm,
                        system=point_system,
                        noma=point_noma,
                        metrics=scenario.metrics,
                        mc=mc,
                        approx_sinr_threshold=threshold,
                    ))

        logger.info(f"场景 {scenario.name}: {len(grid)} 个网格点, 共 {len(payloads)} 个计算任务")
        return {"payloads": payloads}


class EvaluatePointsStep(WorkflowStep):
    """逐点提交 Celery 任务并收集行"""

    def execute(self, context: Dict[str, Any]) -> Dict[str, Any]:
        payloads = context["payloads"]

        def progress(done: int, total: int):
            self.update_progress(100.0 * done / total, f"已完成 {done}/{total} 个网格点")

        return {"rows": dispatch_points(payloads, progress)}


class AssembleResultStep(WorkflowStep):
    """按固定顺序组装结果表"""

    def execute(self, context: Dict[str, Any]) -> Dict[str, Any]:
        scenario: Scenario = context["scenario"]
        result = SweepResult.from_rows(
            context["rows"],
            scheme_order=[str(s) for s in scenario.schemes],
            variant_order=[v.name for v in scenario.variants],
        )
        logger.info(f"场景 {scenario.name}: 结果共 {len(result)} 行")
        return {"result": result}


class SweepWorkflow(BaseWorkflow):
    """参数扫描工作流：build_grid → evaluate_points → assemble_result"""

    def get_workflow_steps(self) -> List[WorkflowStep]:
        return [
            BuildGridStep("build_grid", self.step_config("build_grid")),
            EvaluatePointsStep("evaluate_points", self.step_config("evaluate_points")),
            AssembleResultStep("assemble_result", self.step_config("assemble_result")),
        ]
