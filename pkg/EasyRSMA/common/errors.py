"""EasyRSMA 异常体系。

每个异常携带 exit_code，管理命令据此转换为 CommandError(returncode=...)：
0 成功, 1 未预期错误, 2 参数用法 (argparse), 3 场景文件解析, 4 参数校验, 5 数值, 6 I/O。
"""
from typing import Iterable, Optional, Sequence


class EasyRSMAError(Exception):
    """所有 EasyRSMA 错误的基类"""
    exit_code = 1


class ScenarioParseError(EasyRSMAError):
    """场景文件语法错误，带行列号"""
    exit_code = 3

    def __init__(self, message: str, path: str = "", line: Optional[int] = None, column: Optional[int] = None):
        self.path = path
        self.line = line
        self.column = column
        location = path or "<scenario>"
        if line is not None:
            location = f"{location}:{line}"
            if column is not None:
                location = f"{location}:{column}"
        super().__init__(f"{location}: {message}")


class ConfigValidationError(EasyRSMAError, ValueError):
    """配置不满足不变量；keys 为出错的字段名"""
    exit_code = 4

    def __init__(self, message: str, keys: Iterable[str] = ()):
        self.message = message
        self.keys = tuple(keys)
        if self.keys:
            message = f"{message} [keys: {', '.join(self.keys)}]"
        super().__init__(message)


class NumericError(EasyRSMAError, ArithmeticError):
    """数值计算错误的基类"""
    exit_code = 5


class DegenerateChannelError(NumericError):
    """估计信道方差为 0，闭式解无定义"""


class SpecialFunctionError(NumericError):
    """特殊函数参数越界或结果溢出"""


class DegenerateInputError(NumericError):
    """输入退化 (例如全零速率向量的 JFI)"""


class SweepPointError(NumericError):
    """某个扫描点计算失败，coords 标识该点"""

    def __init__(self, message: str, coords: Sequence[tuple] = (), exit_code: Optional[int] = None):
        self.coords = dict(coords)
        if exit_code is not None:
            self.exit_code = exit_code
        where = ", ".join(f"{k}={v}" for k, v in self.coords.items())
        super().__init__(f"{message} (at {where})" if where else message)


class EmitError(EasyRSMAError, OSError):
    """场景或结果文件读写失败"""
    exit_code = 6
