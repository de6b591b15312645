from django.apps import AppConfig


class SweepAppConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "EasyRSMA.sweep_app"
    verbose_name = "RSMA 参数扫描"
