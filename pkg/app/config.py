"""
进程级配置模块
主要功能：从环境变量(前缀 HSIFUSE_)与 .env 文件读取运行设置

实现说明：
1. num_threads 写入 BLAS 线程环境变量，须在导入 numpy 之前调用 apply_thread_settings
2. num_threads=1 为确定性模式
"""

import os

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

THREAD_ENV_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


class Settings(BaseSettings):
    """
    运行设置

    属性说明：
    - num_threads: 数值库线程数
    - log_level: 日志级别
    - log_json: 控制台是否输出 JSON 日志
    - run_log_name: 每次运行在输出目录中写入的 JSON 日志文件名
    """
    model_config = SettingsConfigDict(env_prefix="HSIFUSE_", env_file=".env", extra="ignore")

    num_threads: int = Field(1, ge=1, description="数值库线程数")
    log_level: str = Field("INFO", description="日志级别")
    log_json: bool = Field(False, description="控制台是否输出JSON日志")
    run_log_name: str = Field("run_log.jsonl", description="运行日志文件名")


def apply_thread_settings(current: Settings):
    """把线程数写入 BLAS 相关环境变量"""
    for name in THREAD_ENV_VARS:
        os.environ[name] = str(current.num_threads)


# 单例模式
settings = Settings()
