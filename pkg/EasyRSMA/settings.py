"""
Django settings for EasyRSMA project.

EasyRSMA 没有数据库、没有 Web 入口，Django 只负责配置、日志、
管理命令 (validate / sweep / point / start_sweep_worker) 和测试运行器。

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import os
import sys
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv("EASYRSMA_SECRET_KEY", "django-insecure-easyrsma-local-only")

DEBUG = os.getenv("EASYRSMA_DEBUG", "false").lower() == "true"

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "EasyRSMA.sweep_app",
]

MIDDLEWARE = []

# 纯计算项目，不使用数据库
DATABASES = {}

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# Monte-Carlo 配置
MONTECARLO_CONFIG = {
    "n_samples": int(os.getenv("EASYRSMA_MC_SAMPLES", "1000000")),
    "seed": int(os.getenv("EASYRSMA_MC_SEED", "20240601")),
    "block_size": int(os.getenv("EASYRSMA_MC_BLOCK_SIZE", str(2 ** 17))),
}

# 扫描 / 输出配置
SWEEP_CONFIG = {
    "scenario_dir": os.getenv("EASYRSMA_SCENARIO_DIR", str(BASE_DIR / "scenarios")),
    "output_dir": os.getenv("EASYRSMA_OUTPUT_DIR", str(BASE_DIR / "results")),
    "plot_format": os.getenv("EASYRSMA_PLOT_FORMAT", "svg"),
    # MC 平均 SINR 超过该值时，Topsøe 近似不再紧致，结果中打 approx_warning
    "approx_sinr_threshold": float(os.getenv("EASYRSMA_APPROX_SINR_THRESHOLD", "3.0")),
}

# Redis 配置 (仅作为 Celery broker / result backend)
REDIS_CONFIG = {
    "host": os.getenv('REDIS_HOST', 'localhost'),
    "port": int(os.getenv('REDIS_PORT', '6379')),
    "db": int(os.getenv('REDIS_DB', '0')),
    "password": os.getenv('REDIS_PASSWORD', ''),
}

# Celery 配置
if REDIS_CONFIG.get('password'):
    CELERY_BROKER_URL = f"redis://:{REDIS_CONFIG['password']}@{REDIS_CONFIG['host']}:{REDIS_CONFIG['port']}/{REDIS_CONFIG['db']}"
    CELERY_RESULT_BACKEND = f"redis://:{REDIS_CONFIG['password']}@{REDIS_CONFIG['host']}:{REDIS_CONFIG['port']}/{REDIS_CONFIG['db']}"
else:
    CELERY_BROKER_URL = f"redis://{REDIS_CONFIG['host']}:{REDIS_CONFIG['port']}/{REDIS_CONFIG['db']}"
    CELERY_RESULT_BACKEND = f"redis://{REDIS_CONFIG['host']}:{REDIS_CONFIG['port']}/{REDIS_CONFIG['db']}"

CELERY_TASK_SERIALIZER = 'json'
CELERY_ACCEPT_CONTENT = ['json']
CELERY_RESULT_SERIALIZER = 'json'
CELERY_TIMEZONE = 'UTC'
CELERY_ENABLE_UTC = True

# Celery 任务路由
CELERY_TASK_ROUTES = {
    'EasyRSMA.tasks.*': {'queue': 'sweep_points'},
}

CELERY_TASK_ACKS_LATE = True
CELERY_WORKER_PREFETCH_MULTIPLIER = 1
CELERY_TASK_RESULT_EXPIRES = 3600

# 默认在本进程内同步执行扫描点；设为 false 时分发到 sweep_points 队列上的 worker
CELERY_TASK_ALWAYS_EAGER = os.getenv('CELERY_TASK_ALWAYS_EAGER', 'true').lower() == 'true'
CELERY_TASK_EAGER_PROPAGATES = True

# 日志配置
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': sys.stderr,
            'formatter': 'verbose',
        },
        'file': {
            'class': 'logging.FileHandler',
            'filename': os.getenv('EASYRSMA_LOG_FILE', 'easyrsma.log'),
            'formatter': 'verbose',
            'delay': True,
        },
    },
    'root': {
        'handlers': ['console', 'file'],
        'level': os.getenv('EASYRSMA_LOG_LEVEL', 'WARNING'),
    },
    'loggers': {
        'django': {
            'handlers': ['console', 'file'],
            'level': 'WARNING',
            'propagate': False,
        },
        'EasyRSMA': {
            'handlers': ['console', 'file'],
            'level': os.getenv('EASYRSMA_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}
