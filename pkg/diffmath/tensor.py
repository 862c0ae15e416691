"""
Dense Tensors and Reverse-Mode Tape
Float64 tensors whose primitive operations are recorded on an explicit Tape
"""

import logging
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit
from scipy.special import logsumexp as _logsumexp

from .errors import ContractError, DomainError, GraphError, NumericError, ShapeError

logger = logging.getLogger(__name__)

Axis = Optional[Union[int, Tuple[int, ...]]]
VJP = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Tensor:
    """
    Dense row-major float64 array with an optional gradient slot

    A tensor is recorded on a Tape only when at least one of its inputs was
    watched by (or produced on) that tape.
    """

    # numpy defers binary operators to Tensor
    __array_ufunc__ = None

    def __init__(self, values: Any, requires_grad: bool = False):
        array = np.array(values, dtype=np.float64)
        if not np.all(np.isfinite(array)):
            raise NumericError(f"Tensor of shape {list(array.shape)} holds non-finite values")
        self.values = array
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.tape: Optional["Tape"] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def size(self) -> int:
        return int(self.values.size)

    def item(self) -> float:
        if self.size != 1:
            raise ContractError(f"item() needs a single element, tensor has shape {list(self.shape)}")
        return float(self.values.reshape(()))

    def zero_grad(self):
        self.grad = None

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={list(self.shape)}{flag})"

    # operators
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent: float):
        return power(self, exponent)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, index):
        return getitem(self, index)

    # reductions and shape helpers
    def sum(self, axis: Axis = None, keepdims: bool = False) -> "Tensor":
        return reduce_sum(self, axis, keepdims)

    def mean(self, axis: Axis = None, keepdims: bool = False) -> "Tensor":
        return reduce_mean(self, axis, keepdims)

    def max(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        return reduce_max(self, axis, keepdims)

    def min(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        return reduce_min(self, axis, keepdims)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, axes: Optional[Sequence[int]] = None) -> "Tensor":
        return transpose(self, axes)


class _Node:
    __slots__ = ("name", "output", "inputs", "vjp")

    def __init__(self, name: str, output: Tensor, inputs: Tuple[Tensor, ...], vjp: VJP):
        self.name = name
        self.output = output
        self.inputs = inputs
        self.vjp = vjp


class Tape:
    """
    Ordered record of primitive operations for one training step

    Usage:
        with Tape() as tape:
            tape.watch(model.parameters())
            loss = ...
            tape.backward(loss)
    """

    def __init__(self):
        self.nodes: List[_Node] = []
        self._watched: List[Tensor] = []

    def watch(self, tensors: Union[Tensor, Iterable[Tensor]]) -> "Tape":
        """Attach leaf tensors so operations on them are recorded here"""
        if isinstance(tensors, Tensor):
            tensors = [tensors]
        for tensor in tensors:
            if not tensor.requires_grad:
                raise ContractError(f"Only requires_grad tensors can be watched, got {tensor!r}")
            tensor.tape = self
            self._watched.append(tensor)
        return self

    @property
    def watched(self) -> List[Tensor]:
        return list(self._watched)

    def record(self, name: str, output: Tensor, inputs: Tuple[Tensor, ...], vjp: VJP):
        output.tape = self
        output.requires_grad = True
        self.nodes.append(_Node(name, output, inputs, vjp))

    def backward(self, loss: Tensor) -> List[np.ndarray]:
        return backward(loss, self)

    def release(self):
        for tensor in self._watched:
            if tensor.tape is self:
                tensor.tape = None
        self.nodes.clear()

    def __enter__(self) -> "Tape":
        return self

    def __exit__(self, exc_type, exc, tb):
        self.release()
        return False

    def __len__(self) -> int:
        return len(self.nodes)


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to an operand's shape"""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, dim in enumerate(shape) if dim == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def backward(loss: Tensor, tape: Tape) -> List[np.ndarray]:
    """
    Reverse pass from a scalar loss to every leaf watched by the tape

    Each recorded node is visited at most once, newest first; gradients reaching
    a tensor along several paths are summed. Leaf gradients are accumulated into
    ``leaf.grad``.

    Returns:
        Gradients in the order the leaves were watched
    """
    if loss.size != 1:
        raise ContractError(f"backward() needs a scalar loss, got shape {list(loss.shape)}")
    if not np.all(np.isfinite(loss.values)):
        raise NumericError("backward() called on a non-finite loss")

    leaf_grads: List[np.ndarray] = []
    if loss.tape is None and not loss.requires_grad:
        # constant loss
        for leaf in tape.watched:
            grad = np.zeros_like(leaf.values)
            leaf.grad = grad if leaf.grad is None else leaf.grad + grad
            leaf_grads.append(grad)
        return leaf_grads
    if loss.tape is not tape:
        raise GraphError("Loss was not produced on the given tape")

    adjoints: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.values)}
    for node in reversed(tape.nodes):
        upstream = adjoints.pop(id(node.output), None)
        if upstream is None:
            continue
        for operand, grad in zip(node.inputs, node.vjp(upstream)):
            if grad is None or operand.tape is not tape:
                continue
            grad = _unbroadcast(np.asarray(grad, dtype=np.float64), operand.shape)
            key = id(operand)
            adjoints[key] = adjoints[key] + grad if key in adjoints else grad

    for leaf in tape.watched:
        grad = adjoints.get(id(leaf))
        if grad is None:
            grad = np.zeros_like(leaf.values)
        leaf.grad = grad if leaf.grad is None else leaf.grad + grad
        leaf_grads.append(grad)
    return leaf_grads


def as_tensor(value: Any) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _result(name: str, value: np.ndarray, inputs: Tuple[Tensor, ...], vjp: VJP) -> Tensor:
    value = np.asarray(value, dtype=np.float64)
    if not np.all(np.isfinite(value)):
        raise NumericError(f"Operation '{name}' produced non-finite values")
    output = Tensor.__new__(Tensor)
    output.values = value
    output.requires_grad = False
    output.grad = None
    output.tape = None

    tape: Optional[Tape] = None
    for operand in inputs:
        if operand.tape is None:
            continue
        if tape is None:
            tape = operand.tape
        elif operand.tape is not tape:
            raise GraphError(f"Operation '{name}' mixes tensors from different tapes")
    if tape is not None:
        for operand in inputs:
            if operand.requires_grad and operand.tape is None:
                raise GraphError(f"Operation '{name}' received an untaped tensor that requires grad")
        tape.record(name, output, inputs, vjp)
    return output


# elementwise arithmetic

def add(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _result("add", a.values + b.values, (a, b), lambda g: (g, g))


def sub(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _result("sub", a.values - b.values, (a, b), lambda g: (g, -g))


def mul(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _result("mul", a.values * b.values, (a, b), lambda g: (g * b.values, g * a.values))


def div(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if np.any(b.values == 0):
        raise DomainError("Division by zero")
    return _result(
        "div",
        a.values / b.values,
        (a, b),
        lambda g: (g / b.values, -g * a.values / (b.values * b.values)),
    )


def neg(a: Any) -> Tensor:
    a = as_tensor(a)
    return _result("neg", -a.values, (a,), lambda g: (-g,))


def power(a: Any, exponent: float) -> Tensor:
    a = as_tensor(a)
    exponent = float(exponent)
    return _result(
        "power",
        a.values ** exponent,
        (a,),
        lambda g: (g * exponent * a.values ** (exponent - 1.0),),
    )


def exp(a: Any) -> Tensor:
    a = as_tensor(a)
    value = np.exp(a.values)
    return _result("exp", value, (a,), lambda g: (g * value,))


def log(a: Any) -> Tensor:
    a = as_tensor(a)
    if np.any(a.values <= 0):
        raise DomainError("log() of a non-positive value")
    return _result("log", np.log(a.values), (a,), lambda g: (g / a.values,))


def sqrt(a: Any) -> Tensor:
    a = as_tensor(a)
    if np.any(a.values < 0):
        raise DomainError("sqrt() of a negative value")
    value = np.sqrt(a.values)
    return _result("sqrt", value, (a,), lambda g: (g * 0.5 / value,))


def tanh(a: Any) -> Tensor:
    a = as_tensor(a)
    value = np.tanh(a.values)
    return _result("tanh", value, (a,), lambda g: (g * (1.0 - value * value),))


def elu(a: Any, alpha: float = 1.0) -> Tensor:
    a = as_tensor(a)
    positive = a.values > 0
    value = np.where(positive, a.values, alpha * np.expm1(np.minimum(a.values, 0.0)))
    return _result("elu", value, (a,), lambda g: (g * np.where(positive, 1.0, value + alpha),))


def softplus(a: Any) -> Tensor:
    a = as_tensor(a)
    value = np.logaddexp(0.0, a.values)
    return _result("softplus", value, (a,), lambda g: (g * expit(a.values),))


def stop_gradient(a: Any) -> Tensor:
    """Copy of the values that carries no gradient"""
    return Tensor(as_tensor(a).values.copy())


# linear algebra, reductions, shape

def matmul(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul needs operands with ndim >= 2, got {list(a.shape)} and {list(b.shape)}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul inner dims differ: {list(a.shape)} @ {list(b.shape)}")
    return _result(
        "matmul",
        np.matmul(a.values, b.values),
        (a, b),
        lambda g: (np.matmul(g, np.swapaxes(b.values, -1, -2)), np.matmul(np.swapaxes(a.values, -1, -2), g)),
    )


def _expand_reduced(grad: np.ndarray, shape: Tuple[int, ...], axis: Axis, keepdims: bool) -> np.ndarray:
    if axis is None:
        return np.broadcast_to(grad.reshape((1,) * len(shape)), shape)
    if not keepdims:
        axes = (axis,) if isinstance(axis, int) else axis
        axes = tuple(ax % len(shape) for ax in axes)
        for ax in sorted(axes):
            grad = np.expand_dims(grad, ax)
    return np.broadcast_to(grad, shape)


def reduce_sum(a: Any, axis: Axis = None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    return _result(
        "sum",
        np.sum(a.values, axis=axis, keepdims=keepdims),
        (a,),
        lambda g: (_expand_reduced(g, a.shape, axis, keepdims),),
    )


def reduce_mean(a: Any, axis: Axis = None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    value = np.mean(a.values, axis=axis, keepdims=keepdims)
    count = a.size / max(np.size(value), 1)
    return _result(
        "mean",
        value,
        (a,),
        lambda g: (_expand_reduced(g, a.shape, axis, keepdims) / count,),
    )


def _reduce_extreme(name: str, a: Tensor, axis: Optional[int], keepdims: bool, pick) -> Tensor:
    if axis is None:
        flat = pick(a.values.reshape(-1))
        value = a.values.reshape(-1)[flat]
        if keepdims:
            value = np.reshape(value, (1,) * a.ndim)

        def vjp(g):
            grad = np.zeros(a.size)
            grad[flat] = np.reshape(g, ())
            return (grad.reshape(a.shape),)

        return _result(name, value, (a,), vjp)

    axis = axis % a.ndim
    index = np.expand_dims(pick(a.values, axis=axis), axis)
    value = np.take_along_axis(a.values, index, axis=axis)
    if not keepdims:
        value = np.squeeze(value, axis=axis)

    def vjp(g):
        grad = np.zeros_like(a.values)
        upstream = g if keepdims else np.expand_dims(g, axis)
        # ties resolve to the first extreme element
        np.put_along_axis(grad, index, upstream, axis=axis)
        return (grad,)

    return _result(name, value, (a,), vjp)


def reduce_max(a: Any, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    return _reduce_extreme("max", as_tensor(a), axis, keepdims, np.argmax)


def reduce_min(a: Any, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    return _reduce_extreme("min", as_tensor(a), axis, keepdims, np.argmin)


def logsumexp(a: Any, axis: int = -1, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    value = _logsumexp(a.values, axis=axis, keepdims=keepdims)

    def vjp(g):
        kept = value if keepdims else np.expand_dims(value, axis)
        upstream = g if keepdims else np.expand_dims(g, axis)
        return (upstream * np.exp(a.values - kept),)

    return _result("logsumexp", value, (a,), vjp)


def norm(a: Any, axis: int = -1) -> Tensor:
    """
    Euclidean norm along one axis

    The subgradient at the origin is the zero vector.
    """
    a = as_tensor(a)
    value = np.sqrt(np.sum(a.values * a.values, axis=axis))

    def vjp(g):
        length = np.expand_dims(value, axis)
        safe = np.where(length > 0, length, 1.0)
        direction = np.where(length > 0, a.values / safe, 0.0)
        return (np.expand_dims(g, axis) * direction,)

    return _result("norm", value, (a,), vjp)


def reshape(a: Any, shape: Sequence[int]) -> Tensor:
    a = as_tensor(a)
    try:
        value = a.values.reshape(tuple(shape))
    except ValueError as exc:
        raise ShapeError(f"Cannot reshape {list(a.shape)} into {list(shape)}") from exc
    return _result("reshape", value, (a,), lambda g: (g.reshape(a.shape),))


def expand_dims(a: Any, axis: int) -> Tensor:
    a = as_tensor(a)
    return reshape(a, np.expand_dims(a.values, axis).shape)


def transpose(a: Any, axes: Optional[Sequence[int]] = None) -> Tensor:
    a = as_tensor(a)
    value = np.transpose(a.values, axes)
    inverse = None if axes is None else np.argsort(axes)
    return _result("transpose", value, (a,), lambda g: (np.transpose(g, inverse),))


def getitem(a: Any, index: Any) -> Tensor:
    a = as_tensor(a)
    value = a.values[index]

    def vjp(g):
        grad = np.zeros_like(a.values)
        np.add.at(grad, index, g)
        return (grad,)

    return _result("getitem", np.array(value), (a,), vjp)


def pairwise_distance(a: Any, b: Any, exponent: int = 1) -> Tensor:
    """
    Distances between every row of ``a`` (..., M, d) and ``b`` (..., K, d)

    Args:
        exponent: 1 for the Euclidean distance, 2 for its square

    Returns:
        Tensor of shape (..., M, K)
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-1]:
        raise ShapeError(f"pairwise_distance needs (..., M, d) and (..., K, d), got {list(a.shape)} and {list(b.shape)}")
    if exponent not in (1, 2):
        raise ContractError(f"exponent must be 1 or 2, got {exponent}")
    diff = expand_dims(a, -2) - expand_dims(b, -3)
    if exponent == 1:
        return norm(diff, axis=-1)
    return reduce_sum(diff * diff, axis=-1)
