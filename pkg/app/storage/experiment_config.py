"""
实验配置文件解析模块
主要功能：把 key = value 文本配置解析为 ExperimentConfig

实现说明：
1. 空行与以 # 开头的行被忽略，行内 # 之后为注释
2. 重复键、缺少等号的行直接报格式错误(带行号)
3. pydantic 校验错误按字段名映射回所在行
4. 相对路径以配置文件所在目录为基准
"""

from typing import Dict, Tuple
import logging
import os

from pydantic import ValidationError

from app.models.experiment import PATH_KEYS, ExperimentConfig
from tensor.exceptions import FormatError

logger = logging.getLogger(__name__)


def parse_key_values(path: str) -> Tuple[Dict[str, str], Dict[str, int]]:
    """
    读取 key = value 文件

    返回:
        (键值字典, 键到行号的映射)
    """
    values: Dict[str, str] = {}
    lines: Dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            key, sep, value = text.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or not key:
                raise FormatError(f"应为 key = value 格式: {raw.strip()!r}", path=path, line=line_no)
            if key in values:
                raise FormatError(f"重复的配置项 '{key}' (首次出现在第 {lines[key]} 行)",
                                  path=path, line=line_no)
            values[key] = value
            lines[key] = line_no
    return values, lines


def resolve_paths(values: Dict[str, str], base_dir: str) -> Dict[str, str]:
    resolved = dict(values)
    for key in PATH_KEYS:
        value = resolved.get(key)
        if value and not os.path.isabs(value):
            resolved[key] = os.path.normpath(os.path.join(base_dir, value))
    srf = resolved.get("srf", "")
    if srf.startswith("file:") and not os.path.isabs(srf[len("file:"):]):
        resolved["srf"] = "file:" + os.path.normpath(os.path.join(base_dir, srf[len("file:"):]))
    return resolved


def load_experiment_config(path: str) -> ExperimentConfig:
    """
    加载并校验实验配置文件

    参数:
        path: 配置文件路径

    返回:
        ExperimentConfig

    异常:
        FormatError: 语法错误、未知键或取值不合法，message 中带有行号
    """
    values, lines = parse_key_values(path)
    values = resolve_paths(values, os.path.dirname(os.path.abspath(path)))
    try:
        config = ExperimentConfig(**values)
    except ValidationError as e:
        error = e.errors()[0]
        key = str(error["loc"][0]) if error["loc"] else None
        raise FormatError(f"配置项 '{key}' 不合法: {error['msg']}", path=path, line=lines.get(key))
    logger.info(f"加载实验配置: {path}")
    return config


def write_experiment_config(path: str, values: Dict[str, object]):
    """按 key = value 格式写出配置(值为 None 的键被省略)"""
    with open(path, "w", encoding="utf-8") as f:
        for key, value in values.items():
            if value is None:
                continue
            if isinstance(value, bool):
                value = "true" if value else "false"
            f.write(f"{key} = {value}\n")
