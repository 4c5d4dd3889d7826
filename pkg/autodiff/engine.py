"""
反向模式自动微分引擎
主要功能：在 numpy 稠密数组上构建计算图并执行反向传播

实现说明：
1. 每个 DiffArray 节点持有数值、梯度、父节点与局部反向函数
2. 节点编号单调递增，父节点总是先于子节点创建，
   因此按编号降序即为合法的逆拓扑序
3. 反向传播中每个节点恰好处理一次，梯度按 += 累积
"""

from typing import Callable, Iterable, List, Optional, Sequence, Tuple
import itertools
import logging

import numpy as np

from tensor.exceptions import ArgumentError

logger = logging.getLogger(__name__)

_node_counter = itertools.count()

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class DiffArray:
    """
    可微数组

    属性说明：
    - value: 数值(batch=1 时最多4个轴: batch, channels, height, width)
    - grad: 与 value 同形状的梯度，由 backward 填充
    - parents: 父节点
    - op: 产生该节点的运算名称
    - node_id: 计算图中的节点编号
    """

    def __init__(self,
                 value,
                 requires_grad: bool = False,
                 name: Optional[str] = None,
                 parents: Iterable["DiffArray"] = (),
                 backward_fn: Optional[BackwardFn] = None,
                 op: str = "leaf"):
        self.value = np.asarray(value)
        self.parents: Tuple[DiffArray, ...] = tuple(parents)
        self.requires_grad = bool(requires_grad) or any(p.requires_grad for p in self.parents)
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self.op = op
        self.node_id = next(_node_counter)
        self._backward_fn = backward_fn if self.requires_grad else None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def dtype(self) -> np.dtype:
        return self.value.dtype

    @property
    def ndim(self) -> int:
        return self.value.ndim

    @property
    def is_leaf(self) -> bool:
        return not self.parents

    def item(self) -> float:
        return float(self.value.item())

    def zero_grad(self):
        self.grad = None

    def detach(self) -> "DiffArray":
        return DiffArray(self.value, name=self.name)

    def __repr__(self) -> str:
        label = self.name or self.op
        return f"DiffArray({label}, shape={self.shape}, dtype={self.dtype})"

    def ancestors(self) -> List["DiffArray"]:
        """返回所有需要梯度的祖先节点(含自身)，按逆拓扑序排列"""
        seen = {}
        stack = [self]
        while stack:
            node = stack.pop()
            if node.node_id in seen or not node.requires_grad:
                continue
            seen[node.node_id] = node
            stack.extend(node.parents)
        return [seen[k] for k in sorted(seen, reverse=True)]

    def backward(self, grad: Optional[np.ndarray] = None):
        """
        反向传播

        参数:
            grad: 输出梯度；标量节点可省略(默认为1)
        """
        if not self.requires_grad:
            raise ArgumentError("该节点不需要梯度，无法反向传播")
        if grad is None:
            if self.value.size != 1:
                raise ArgumentError(f"非标量节点 {self.shape} 反向传播需要显式给出梯度")
            grad = np.ones_like(self.value)
        grad = np.asarray(grad, dtype=self.dtype)
        if grad.shape != self.shape:
            raise ArgumentError(f"梯度形状 {grad.shape} 与数值形状 {self.shape} 不一致")

        pending = {self.node_id: grad}
        for node in self.ancestors():
            g = pending.pop(node.node_id, None)
            if g is None:
                continue
            node.grad = g.copy() if node.grad is None else node.grad + g
            if node._backward_fn is None:
                continue
            parent_grads = node._backward_fn(g)
            for parent, pg in zip(node.parents, parent_grads):
                if pg is None or not parent.requires_grad:
                    continue
                pg = np.asarray(pg, dtype=parent.dtype)
                if parent.node_id in pending:
                    pending[parent.node_id] = pending[parent.node_id] + pg
                else:
                    pending[parent.node_id] = pg

    def first_non_finite(self) -> Optional["DiffArray"]:
        """按正向顺序查找计算图中第一个出现非有限值的节点"""
        seen = {}
        stack = [self]
        while stack:
            node = stack.pop()
            if node.node_id in seen:
                continue
            seen[node.node_id] = node
            stack.extend(node.parents)
        for key in sorted(seen):
            if not np.all(np.isfinite(seen[key].value)):
                return seen[key]
        return None

    # 运算符重载，实现见 autodiff.ops
    def __add__(self, other):
        return ops.add(self, other)

    def __radd__(self, other):
        return ops.add(other, self)

    def __sub__(self, other):
        return ops.sub(self, other)

    def __rsub__(self, other):
        return ops.sub(other, self)

    def __mul__(self, other):
        return ops.mul(self, other)

    def __rmul__(self, other):
        return ops.mul(other, self)

    def __neg__(self):
        return ops.neg(self)

    def __matmul__(self, other):
        return ops.matmul(self, other)


def parameter(value, name: Optional[str] = None) -> DiffArray:
    """创建需要梯度的叶子节点"""
    return DiffArray(np.array(value, copy=True), requires_grad=True, name=name)


def constant(value, dtype=None) -> DiffArray:
    """创建常量叶子节点"""
    return DiffArray(np.asarray(value, dtype=dtype))


def as_diff(x, dtype=None) -> DiffArray:
    """把数组或标量包装为 DiffArray"""
    if isinstance(x, DiffArray):
        return x
    return constant(x, dtype=dtype)


from autodiff import ops  # noqa: E402
