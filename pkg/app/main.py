"""
命令行入口文件
主要功能：
1. 读取进程级设置并配置线程数与日志
2. 注册 simulate / fuse / evaluate / inspect 子命令
3. 把异常映射为退出码

实现说明：
- 退出码：0 成功，1 数值失败(训练损失非有限)，2 参数/格式/IO 错误
- 用法：python -m app.main <子命令> --help
"""

from typing import Optional, Sequence
import argparse
import logging
import sys

from app.config import apply_thread_settings, settings

# 线程环境变量须在导入 numpy 之前设置
apply_thread_settings(settings)

from pydantic import ValidationError  # noqa: E402

from app.commands import COMMANDS  # noqa: E402
from app.logging_config import setup_logging  # noqa: E402
from tensor.exceptions import FusionError, NumericalError  # noqa: E402

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsifuse",
        description="基于深度 Tucker 分解的高光谱/多光谱图像无监督融合",
    )
    parser.add_argument("--log-level", default=None, help=f"日志级别(默认 {settings.log_level})")
    parser.add_argument("--log-json", action="store_true", help="控制台输出 JSON 日志")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.add_parser(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    命令行主函数

    参数:
        argv: 命令行参数，为空时使用 sys.argv[1:]

    返回:
        退出码
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level or settings.log_level, args.log_json or settings.log_json)

    try:
        return args.handler(args)
    except NumericalError as e:
        logger.error(f"数值错误: {str(e)}")
        return EXIT_NUMERICAL
    except (FusionError, ValidationError, ValueError, OSError) as e:
        logger.error(f"{args.command} 失败: {str(e)}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
