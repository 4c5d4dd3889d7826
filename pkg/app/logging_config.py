"""
日志配置模块
主要功能：控制台文本/JSON 日志与每次运行的 JSON 运行日志

实现说明：
1. 控制台文本格式：'%(asctime)s - %(name)s - %(levelname)s - %(message)s'
2. JSON 格式由 python-json-logger 的 JsonFormatter 输出，每行一条记录
"""

from typing import Optional
import logging
import sys

from pythonjsonlogger import jsonlogger

TEXT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
JSON_FORMAT = '%(asctime)s %(name)s %(levelname)s %(message)s'


def json_formatter() -> logging.Formatter:
    return jsonlogger.JsonFormatter(JSON_FORMAT, json_ensure_ascii=False)


def setup_logging(level: str = "INFO", json_format: bool = False,
                  log_file: Optional[str] = None) -> logging.Logger:
    """
    配置根日志器

    参数:
        level: 日志级别
        json_format: 控制台是否使用 JSON 格式
        log_file: JSON 运行日志路径，可选

    返回:
        根日志器
    """
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(json_formatter() if json_format else logging.Formatter(TEXT_FORMAT))
    root.addHandler(handler)
    root.setLevel(level.upper())
    if log_file:
        attach_run_log(log_file)
    return root


def attach_run_log(path: str) -> logging.Handler:
    """在根日志器上添加 JSON 运行日志文件，返回该 handler 以便运行结束时移除"""
    handler = logging.FileHandler(path, mode="w", encoding="utf-8")
    handler.setFormatter(json_formatter())
    logging.getLogger().addHandler(handler)
    return handler


def detach_run_log(handler: Optional[logging.Handler]):
    if handler is None:
        return
    logging.getLogger().removeHandler(handler)
    handler.close()
