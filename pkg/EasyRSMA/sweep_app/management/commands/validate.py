import logging

from django.core.management.base import BaseCommand

from EasyRSMA.common.errors import EasyRSMAError
from EasyRSMA.sweep_app.scenario import load_scenario, resolve_scenario_path
from ._errors import command_error

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = '解析并校验场景文件，不做任何计算'

    def add_arguments(self, parser):
        parser.add_argument(
            'scenario',
            type=str,
            help='场景文件路径，或 scenarios/ 目录下的场景名'
        )

    def handle(self, *args, **options):
        try:
            scenario = load_scenario(resolve_scenario_path(options['scenario']))
        except EasyRSMAError as e:
            logger.error(f"场景校验失败: {e}")
            raise command_error(e) from e

        grid = scenario.grid()
        self.stdout.write(self.style.SUCCESS(f'场景 {scenario.name} 校验通过'))
        self.stdout.write(f'Users: {scenario.system.n_users}')
        self.stdout.write(f'Axis: {scenario.axis} [{grid[0]:g} .. {grid[-1]:g}], {len(grid)} points')
        self.stdout.write(f'Variants: {", ".join(v.name for v in scenario.variants)}')
        self.stdout.write(f'Schemes: {", ".join(scenario.schemes)}')
        self.stdout.write(f'Metrics: {", ".join(scenario.metrics)}')
