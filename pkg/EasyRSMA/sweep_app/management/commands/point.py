import logging

from django.core.management.base import BaseCommand

from EasyRSMA.common.errors import EasyRSMAError
from EasyRSMA.sweep_app.scenario import load_scenario, resolve_scenario_path
from EasyRSMA.sweep_app.sweep import run_point
from ._errors import command_error

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = '在单个发射功率上计算场景的各方案、各变体'

    def add_arguments(self, parser):
        parser.add_argument(
            'scenario',
            type=str,
            help='场景文件路径，或 scenarios/ 目录下的场景名'
        )
        parser.add_argument(
            '--power',
            type=float,
            required=True,
            help='发射功率 (dBm)'
        )
        parser.add_argument('--samples', type=int, default=None, help='MC 样本数')
        parser.add_argument('--seed', type=int, default=None, help='MC 随机种子')
        parser.add_argument('--no-mc', action='store_true', help='只计算闭式解')

    def handle(self, *args, **options):
        try:
            scenario = load_scenario(resolve_scenario_path(options['scenario']))
            result = run_point(
                scenario,
                options['power'],
                n_samples=options['samples'],
                seed=options['seed'],
                with_mc=False if options['no_mc'] else None,
            )
        except EasyRSMAError as e:
            logger.error(f"单点计算失败: {e}")
            raise command_error(e) from e

        frame = result.frame
        columns = [c for c in frame.columns if c == 'user' or frame[c].notna().any()]
        columns = [c for c in columns if c != 'parameter']
        self.stdout.write(f'{scenario.name} @ P = {options["power"]:g} dBm')
        self.stdout.write(frame[columns].to_string(index=False, na_rep='NA', float_format=lambda v: f'{v:.6f}'))
