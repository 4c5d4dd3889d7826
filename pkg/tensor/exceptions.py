"""
异常定义模块
主要功能：统一融合系统各模块抛出的异常类型

说明：
- ArgumentError: 参数/形状不合法
- FormatError: 文件格式或配置文件错误(携带文件路径与行号)
- NumericalError: 训练过程中出现非有限数值
"""

from typing import Optional


class FusionError(Exception):
    """融合系统异常基类"""


class ArgumentError(FusionError, ValueError):
    """参数错误(维度不匹配、取值越界等)"""


class FormatError(FusionError):
    """
    格式错误

    属性说明：
    - path: 出错文件路径
    - line: 出错行号(从1开始，未知时为None)
    """

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{location}{message}")


class NumericalError(FusionError, ArithmeticError):
    """数值错误(损失或中间张量出现NaN/Inf)"""
