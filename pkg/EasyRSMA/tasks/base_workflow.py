"""
步骤化工作流

工作流把一串 WorkflowStep 顺序执行，每步的返回值合并进共享上下文。
配置 {"steps": {<步骤名>: {"enabled": False}}} 可跳过某一步。
"""
import logging
import time
from abc import ABC, abstractmethod
from enum import StrEnum
from typing import Any, Callable, Dict, List, Optional

logger = logging.getLogger(__name__)

# (步骤名, 进度百分比, 消息)
ProgressListener = Callable[[str, float, str], None]


class WorkflowStepStatus(StrEnum):
    PENDING = "PENDING"
    RUNNING = "RUNNING"
    COMPLETED = "COMPLETED"
    FAILED = "FAILED"
    SKIPPED = "SKIPPED"


class WorkflowStep(ABC):
    """工作流步骤抽象基类"""

    def __init__(self, step_name: str, step_config: Optional[Dict[str, Any]] = None):
        self.step_name = step_name
        self.step_config = step_config or {}
        self.status = WorkflowStepStatus.PENDING
        self.progress = 0.0
        self.message = ""
        self.elapsed_seconds: Optional[float] = None
        self.error: Optional[str] = None
        self.listener: Optional[ProgressListener] = None
        self._started_at: Optional[float] = None

    @abstractmethod
    def execute(self, context: Dict[str, Any]) -> Dict[str, Any]:
        """执行步骤，返回值合并进工作流上下文"""

    def update_progress(self, progress: float, message: str = ""):
        """更新进度并通知监听者"""
        self.progress = progress
        self.message = message
        if self.listener is not None:
            self.listener(self.step_name, progress, message)

    def _finish(self, status: WorkflowStepStatus):
        self.status = status
        if self._started_at is not None:
            self.elapsed_seconds = time.perf_counter() - self._started_at

    def start(self):
        self.status = WorkflowStepStatus.RUNNING
        self._started_at = time.perf_counter()
        self.update_progress(0.0, f"开始: {self.step_name}")

    def complete(self):
        self._finish(WorkflowStepStatus.COMPLETED)
        self.update_progress(100.0, f"完成: {self.step_name} ({self.elapsed_seconds:.2f}s)")

    def fail(self, error: str):
        self.error = error
        self._finish(WorkflowStepStatus.FAILED)
        self.update_progress(self.progress, f"失败: {self.step_name} - {error}")

    def skip(self, reason: str = ""):
        self._finish(WorkflowStepStatus.SKIPPED)
        self.update_progress(100.0, f"跳过: {self.step_name} {reason}".rstrip())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "step_name": self.step_name,
            "status": str(self.status),
            "progress": self.progress,
            "message": self.message,
            "elapsed_seconds": self.elapsed_seconds,
            "error": self.error,
        }


class BaseWorkflow(ABC):
    """顺序执行步骤；步骤失败时记录状态并重新抛出原异常"""

    def __init__(self, workflow_config: Optional[Dict[str, Any]] = None,
                 listener: Optional[ProgressListener] = None):
        self.workflow_config = workflow_config or {}
        self.listener = listener
        self.steps: List[WorkflowStep] = []
        self.context: Dict[str, Any] = {}

    @abstractmethod
    def get_workflow_steps(self) -> List[WorkflowStep]:
        """获取工作流步骤列表"""

    def step_config(self, step_name: str) -> Dict[str, Any]:
        return self.workflow_config.get("steps", {}).get(step_name, {})

    def execute(self, initial_context: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """执行工作流，返回最终上下文"""
        self.context = dict(initial_context or {})
        if not self.steps:
            self.steps = self.get_workflow_steps()
        name = type(self).__name__

        for i, step in enumerate(self.steps, start=1):
            step.listener = self.listener
            if not self.step_config(step.step_name).get("enabled", True):
                logger.info(f"{name} 步骤 {i}/{len(self.steps)} {step.step_name}: 已配置为跳过")
                step.skip()
                continue

            step.start()
            try:
                result = step.execute(self.context)
            except Exception as e:
                logger.error(f"{name} 步骤 {step.step_name} 失败: {e}")
                step.fail(str(e))
                raise
            step.complete()
            self.context.update(result or {})
            logger.info(f"{name} 步骤 {i}/{len(self.steps)} {step.step_name}: {step.elapsed_seconds:.2f}s")

        return self.context

    def get_progress(self) -> Dict[str, Any]:
        """获取工作流进度"""
        completed = sum(1 for step in self.steps if step.status is WorkflowStepStatus.COMPLETED)
        total = len(self.steps)
        return {
            "progress": completed / total * 100 if total else 0,
            "completed_steps": completed,
            "total_steps": total,
            "steps": [step.to_dict() for step in self.steps],
        }
