from django.core.management.base import BaseCommand
import subprocess
import sys


class Command(BaseCommand):
    help = '启动处理扫描网格点的 Celery worker 进程'

    def add_arguments(self, parser):
        parser.add_argument(
            '--queues',
            type=str,
            default='sweep_points',
            help='要处理的队列列表，用逗号分隔 (默认: sweep_points)'
        )
        parser.add_argument(
            '--loglevel',
            type=str,
            default='info',
            choices=['debug', 'info', 'warning', 'error', 'critical'],
            help='日志级别 (默认: info)'
        )
        parser.add_argument(
            '--concurrency',
            type=int,
            default=4,
            help='worker 并发进程数 (默认: 4)'
        )

    def build_command(self, options) -> list:
        return [
            'celery',
            '-A', 'EasyRSMA.celery_app',
            'worker',
            '--loglevel=' + options['loglevel'],
            '--concurrency=' + str(options['concurrency']),
            '--queues=' + options['queues'],
            '--hostname=sweep@%h',
        ]

    def handle(self, *args, **options):
        cmd = self.build_command(options)
        self.stdout.write(self.style.SUCCESS('启动扫描 worker...'))
        self.stdout.write(f'Queues: {options["queues"]}')
        self.stdout.write(f'Concurrency: {options["concurrency"]}')
        self.stdout.write('提示: 提交扫描的进程需设置 CELERY_TASK_ALWAYS_EAGER=false')

        try:
            self.stdout.write(f'执行命令: {" ".join(cmd)}')
            subprocess.run(cmd, check=True)
        except subprocess.CalledProcessError as e:
            self.stdout.write(self.style.ERROR(f'启动扫描 worker 失败: {e}'))
            sys.exit(1)
        except KeyboardInterrupt:
            self.stdout.write(self.style.WARNING('收到中断信号，正在停止扫描 worker...'))
        except Exception as e:
            self.stdout.write(self.style.ERROR(f'启动扫描 worker 时发生错误: {e}'))
            sys.exit(1)
