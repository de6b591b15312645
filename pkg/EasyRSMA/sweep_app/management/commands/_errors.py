from django.core.management.base import CommandError

from EasyRSMA.common.errors import EasyRSMAError


def command_error(exc: EasyRSMAError) -> CommandError:
    """EasyRSMA 异常 -> 带退出码的 CommandError"""
    return CommandError(str(exc), returncode=exc.exit_code)
