from unittest.mock import patch

from django.test import SimpleTestCase

from .base_workflow import BaseWorkflow, WorkflowStep, WorkflowStepStatus
from .sweep_tasks import evaluate_grid_point_task


class RecordingStep(WorkflowStep):
    def execute(self, context):
        context.setdefault("order", []).append(self.step_name)
        return {self.step_name: self.step_config.get("value", True)}


class FailingStep(WorkflowStep):
    def execute(self, context):
        self.update_progress(40.0, "半途")
        raise RuntimeError("boom")


class DemoWorkflow(BaseWorkflow):
    def __init__(self, steps, workflow_config=None, listener=None):
        super().__init__(workflow_config, listener)
        self._steps = steps

    def get_workflow_steps(self):
        return self._steps


class BaseWorkflowTest(SimpleTestCase):
    """测试基础工作流"""

    def test_steps_run_in_order_and_merge_context(self):
        workflow = DemoWorkflow([
            RecordingStep("first", {"value": 1}),
            RecordingStep("second", {"value": 2}),
        ])
        context = workflow.execute({"seed": 9})
        self.assertEqual(context["order"], ["first", "second"])
        self.assertEqual(context["first"], 1)
        self.assertEqual(context["second"], 2)
        self.assertEqual(context["seed"], 9)
        progress = workflow.get_progress()
        self.assertEqual(progress["completed_steps"], 2)
        self.assertEqual(progress["progress"], 100)
        self.assertEqual([s["status"] for s in progress["steps"]], ["COMPLETED", "COMPLETED"])

    def test_disabled_step_is_skipped(self):
        """测试配置为 enabled=False 的步骤被跳过"""
        workflow = DemoWorkflow(
            [RecordingStep("first"), RecordingStep("second")],
            {"steps": {"first": {"enabled": False}}},
        )
        context = workflow.execute()
        self.assertEqual(context["order"], ["second"])
        self.assertIs(workflow.steps[0].status, WorkflowStepStatus.SKIPPED)

    def test_failure_is_recorded_and_reraised(self):
        workflow = DemoWorkflow([RecordingStep("first"), FailingStep("second"), RecordingStep("third")])
        with self.assertRaises(RuntimeError):
            workflow.execute()
        failed = workflow.steps[1]
        self.assertIs(failed.status, WorkflowStepStatus.FAILED)
        self.assertEqual(failed.error, "boom")
        self.assertEqual(failed.progress, 40.0)
        self.assertIs(workflow.steps[2].status, WorkflowStepStatus.PENDING)
        self.assertEqual(workflow.get_progress()["completed_steps"], 1)

    def test_listener_sees_every_update(self):
        events = []
        workflow = DemoWorkflow(
            [RecordingStep("first"), FailingStep("second")],
            listener=lambda name, progress, message: events.append((name, progress)),
        )
        with self.assertRaises(RuntimeError):
            workflow.execute()
        self.assertEqual(events, [("first", 0.0), ("first", 100.0), ("second", 0.0), ("second", 40.0),
                                  ("second", 40.0)])
        self.assertGreaterEqual(workflow.steps[0].elapsed_seconds, 0.0)
        self.assertIsNotNone(workflow.steps[1].elapsed_seconds)
        self.assertEqual(workflow.get_progress()["steps"][1]["error"], "boom")


    def test_progress_without_listener(self):
        """测试没有监听者时进度只记录在步骤上"""
        step = RecordingStep("only")
        step.update_progress(55.0, "一半")
        self.assertEqual((step.progress, step.message), (55.0, "一半"))
        workflow = DemoWorkflow([step])
        workflow.execute()
        self.assertEqual(workflow.get_progress()["steps"][0]["status"], "COMPLETED")


class EvaluateGridPointTaskTest(SimpleTestCase):
    """测试网格点 Celery 任务 (eager 模式)"""

    def test_delegates_to_evaluate_point(self):
        rows = [{"scheme": "rsma", "user": 1}]
        payload = {"scheme": "rsma", "variant": "base", "parameter": "tx_power_dbm", "value": 5.0, "point_index": 0}
        with patch("EasyRSMA.sweep_app.points.evaluate_point", return_value=rows) as mock_evaluate:
            result = evaluate_grid_point_task.apply(args=[payload]).get()
        self.assertEqual(result, rows)
        mock_evaluate.assert_called_once_with(payload)

    def test_errors_propagate(self):
        payload = {"scheme": "rsma", "variant": "base", "parameter": "tx_power_dbm", "value": 5.0, "point_index": 0}
        with patch("EasyRSMA.sweep_app.points.evaluate_point", side_effect=ValueError("bad point")):
            with self.assertRaises(ValueError):
                evaluate_grid_point_task.apply(args=[payload], throw=True).get()
