"""
子命令模块初始化文件
用于导出各个子命令，实现模块化的命令行结构

导出内容：
- simulate: 退化仿真
- fuse: 无监督融合训练
- evaluate: 质量评价
- inspect: 检查点查看
"""

from app.commands import evaluate, fuse, inspect, simulate

COMMANDS = (simulate, fuse, evaluate, inspect)

__all__ = ['simulate', 'fuse', 'evaluate', 'inspect', 'COMMANDS']
