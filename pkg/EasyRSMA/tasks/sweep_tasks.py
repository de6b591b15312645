from typing import Dict, Any, List
import logging

from EasyRSMA.celery_app import app

logger = logging.getLogger(__name__)


@app.task(bind=True, name='EasyRSMA.tasks.evaluate_grid_point')
def evaluate_grid_point_task(self, payload: Dict[str, Any]) -> List[Dict[str, Any]]:
    """
    扫描网格点 Celery 任务

    Args:
        payload: sweep_app.points.point_payload 生成的 JSON 字典

    Returns:
        每个用户一行的结果字典列表
    """
    from EasyRSMA.sweep_app.points import evaluate_point

    logger.info(
        f"evaluate_grid_point_task 开始执行, scheme: {payload.get('scheme')}, "
        f"variant: {payload.get('variant')}, {payload.get('parameter')}={payload.get('value')}"
    )

    # eager 模式下没有 result backend 可写
    if not self.request.is_eager:
        self.update_state(
            state='PROGRESS',
            meta={
                'point_index': payload.get('point_index'),
                'status': '计算网格点'
            }
        )

    try:
        rows = evaluate_point(payload)
    except Exception as e:
        logger.error(f"网格点计算失败: {e}")
        raise

    logger.info(f"evaluate_grid_point_task 完成, 共 {len(rows)} 行")
    return rows
