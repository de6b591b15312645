import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand

from EasyRSMA.common.errors import EasyRSMAError
from EasyRSMA.sweep_app.emitters import emit_csv, emit_plot
from EasyRSMA.sweep_app.scenario import PlotStyle, load_scenario, resolve_scenario_path
from EasyRSMA.sweep_app.sweep import run_sweep
from ._errors import command_error

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = '运行场景扫描，写出 <out>/<场景名>.csv 以及矢量图'

    def add_arguments(self, parser):
        parser.add_argument(
            'scenario',
            type=str,
            help='场景文件路径，或 scenarios/ 目录下的场景名'
        )
        parser.add_argument(
            '--out',
            type=str,
            default=settings.SWEEP_CONFIG['output_dir'],
            help='输出目录 (默认: SWEEP_CONFIG["output_dir"])'
        )
        parser.add_argument(
            '--samples',
            type=int,
            default=None,
            help='MC 样本数 (默认: 场景文件或 EASYRSMA_MC_SAMPLES)'
        )
        parser.add_argument(
            '--seed',
            type=int,
            default=None,
            help='MC 随机种子 (默认: 场景文件或 EASYRSMA_MC_SEED)'
        )
        parser.add_argument(
            '--no-mc',
            action='store_true',
            help='只计算闭式解'
        )
        parser.add_argument(
            '--no-plot',
            action='store_true',
            help='不生成图像'
        )

    def _report_progress(self, step_name, progress, message):
        self.stdout.write(f'[{step_name} {progress:5.1f}%] {message}')

    def handle(self, *args, **options):
        out_dir = Path(options['out'])
        try:
            scenario = load_scenario(resolve_scenario_path(options['scenario']))
            result = run_sweep(
                scenario,
                n_samples=options['samples'],
                seed=options['seed'],
                with_mc=False if options['no_mc'] else None,
                listener=self._report_progress if options['verbosity'] >= 2 else None,
            )
            csv_path = emit_csv(result, out_dir / f'{scenario.name}.csv')
            self.stdout.write(f'CSV: {csv_path} ({len(result)} rows)')

            if not options['no_plot'] and scenario.plot is not PlotStyle.NONE:
                summary = emit_plot(
                    result,
                    out_dir / f'{scenario.name}.{scenario.plot_format}',
                    style=scenario.plot,
                    title=scenario.title,
                    variant_labels={v.name: v.display_label for v in scenario.variants},
                )
                self.stdout.write(f'Plot: {summary.path} ({len(summary.panels)} panels)')
        except EasyRSMAError as e:
            logger.error(f"扫描失败: {e}")
            raise command_error(e) from e

        warnings = int(result.frame['approx_warning'].fillna(False).sum())
        if warnings:
            self.stdout.write(
                self.style.WARNING(f'{warnings} 行的平均 SINR 超出 Topsøe 近似的紧致范围 (approx_warning)')
            )
        self.stdout.write(self.style.SUCCESS(f'场景 {scenario.name} 扫描完成'))
