import os
from celery import Celery
from django.conf import settings

# 设置默认Django设置模块
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'EasyRSMA.settings')

# 创建Celery应用
app = Celery('EasyRSMATasks')

# 使用Django的设置
app.config_from_object('django.conf:settings', namespace='CELERY')

# 扫描点任务不在 INSTALLED_APPS 里，显式注册
app.autodiscover_tasks(['EasyRSMA.tasks'], related_name='sweep_tasks')

app.conf.update(
    task_serializer='json',
    accept_content=['json'],
    result_serializer='json',

    # 任务路由
    task_routes={
        'EasyRSMA.tasks.*': {'queue': 'sweep_points'},
    },

    # 任务执行配置
    task_acks_late=True,
    worker_prefetch_multiplier=1,
    result_backend=settings.CELERY_RESULT_BACKEND,
    result_expires=3600,

    task_always_eager=settings.CELERY_TASK_ALWAYS_EAGER,
    task_eager_propagates=True,
)
