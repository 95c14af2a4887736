"""Reverse-mode tape with forward-mode spatial duals layered on top.

Every tape node holds a numpy array (a 0-d array for scalars). Its local
partials are either an array multiplied elementwise into the incoming
adjoint, or a callable vector-Jacobian product for structural ops such as
``matmul`` and indexing. Nodes are appended in creation order, so parents
always have smaller indices than their children and a single backwards
pass over the list is a valid reverse topological sweep.

Spatial derivatives are carried by :class:`SpatialDual`, whose primal and
tangents are themselves tape expressions (or plain arrays when nothing on
the path depends on parameters). Differentiating the loss through the
tangents is what gives forward-over-reverse second derivatives.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

ArrayLike = Union[np.ndarray, float]


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum ``g`` down to ``shape`` (reverse of numpy broadcasting)."""
    if g.shape == shape:
        return g
    ndim_extra = g.ndim - len(shape)
    if ndim_extra > 0:
        g = g.sum(axis=tuple(range(ndim_extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


class Node:
    """One recorded value on a :class:`Tape`."""

    __slots__ = ("tape", "index", "value", "parents", "adjoint")
    # let numpy defer to our reflected operators (ndarray * Node -> Node)
    __array_ufunc__ = None

    def __init__(self, tape: "Tape", value, parents=()):
        self.tape = tape
        self.value = np.asarray(value, dtype=np.float64)
        self.parents = tuple(parents)
        self.adjoint = None
        self.index = len(tape.nodes)
        tape.nodes.append(self)

    @property
    def shape(self) -> tuple:
        return self.value.shape

    def __repr__(self) -> str:
        return f"Node(#{self.index}, shape={self.value.shape})"

    def __float__(self) -> float:
        return float(self.value)

    # arithmetic -----------------------------------------------------------
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
        return mul(self, -1.0)

    def __pow__(self, p):
        return power(self, p)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __getitem__(self, idx):
        return getitem(self, idx)

    def sum(self, axis=None):
        return reduce_sum(self, axis)


class Tape:
    """An append-only list of nodes; rebuilt for every loss evaluation."""

    def __init__(self):
        self.nodes: list[Node] = []

    def leaf(self, value) -> Node:
        return Node(self, value)

    def scalar(self, value: float) -> Node:
        return Node(self, float(value))

    def reverse_sweep(self, root: Node) -> list:
        """Fill ``adjoint`` on every node with d(root)/d(node).

        Nodes that do not influence ``root`` keep ``adjoint = None``.
        """
        if root.tape is not self:
            raise ValueError("root belongs to a different tape")
        if root.value.size != 1:
            raise ValueError("reverse sweep needs a scalar root")
        for node in self.nodes:
            node.adjoint = None
        root.adjoint = np.ones_like(root.value)
        for node in reversed(self.nodes[: root.index + 1]):
            g = node.adjoint
            if g is None:
                continue
            for parent, partial in node.parents:
                if callable(partial):
                    contrib = partial(g)
                else:
                    contrib = _unbroadcast(g * partial, parent.value.shape)
                if parent.adjoint is None:
                    parent.adjoint = contrib
                else:
                    parent.adjoint = parent.adjoint + contrib
        return [n.adjoint for n in self.nodes]

    def release(self) -> None:
        """Drop recorded nodes so the tape's arrays can be freed immediately.

        Nodes and their tape reference each other; without this the memory
        of a finished tape waits for the cyclic garbage collector.
        """
        for node in self.nodes:
            node.parents = ()
        self.nodes = []


def tape_scalar(tape: Tape, value: float) -> Node:
    return tape.scalar(value)


def value_of(x) -> np.ndarray:
    return x.value if isinstance(x, Node) else np.asarray(x, dtype=np.float64)


def _tape_of(*args) -> Tape | None:
    for a in args:
        if isinstance(a, Node):
            return a.tape
    return None


def _record(tape, value, parents):
    """Create a node; only parents that are themselves nodes are linked."""
    return Node(tape, value, [(p, d) for p, d in parents if isinstance(p, Node)])


# elementwise primitives ----------------------------------------------------

def add(a, b):
    tape = _tape_of(a, b)
    if tape is None:
        return np.add(a, b)
    va, vb = value_of(a), value_of(b)
    return _record(tape, va + vb, [(a, 1.0), (b, 1.0)])


def sub(a, b):
    tape = _tape_of(a, b)
    if tape is None:
        return np.subtract(a, b)
    va, vb = value_of(a), value_of(b)
    return _record(tape, va - vb, [(a, 1.0), (b, -1.0)])


def mul(a, b):
    tape = _tape_of(a, b)
    if tape is None:
        return np.multiply(a, b)
    va, vb = value_of(a), value_of(b)
    return _record(tape, va * vb, [(a, vb), (b, va)])


def div(a, b):
    tape = _tape_of(a, b)
    vb = value_of(b)
    if np.any(vb == 0.0):
        raise ZeroDivisionError("division by zero on tape")
    if tape is None:
        return np.divide(a, b)
    va = value_of(a)
    out = va / vb
    return _record(tape, out, [(a, 1.0 / vb), (b, -out / vb)])


def power(a, p: float):
    """``a ** p`` for a constant exponent."""
    if isinstance(p, Node):
        raise TypeError("exponent must be a constant")
    if not isinstance(a, Node):
        return np.power(a, p)
    va = a.value
    return _record(a.tape, va**p, [(a, p * va ** (p - 1))])


def square(a):
    return mul(a, a)


# activations: value, first and second derivative from one evaluation -------

def _tanh_derivs(z):
    t = np.tanh(z)
    s = 1.0 - t * t
    return t, s, -2.0 * t * s


def _tanh2_derivs(z):
    t = np.tanh(z)
    s = 1.0 - t * t
    return t * t, 2.0 * t * s, 2.0 * s * (1.0 - 3.0 * t * t)


def _elu2_derivs(z):
    # elu'(0) := 1; both one-sided limits of (elu^2)' and (elu^2)'' agree at 0
    neg = z < 0.0
    ez = np.exp(np.where(neg, z, 0.0))
    e = np.where(neg, ez - 1.0, z)
    de = np.where(neg, ez, 1.0)
    d2 = np.where(neg, 2.0 * ez * (2.0 * ez - 1.0), 2.0)
    return e * e, 2.0 * e * de, d2


def _identity_derivs(z):
    return z, np.ones_like(z), np.zeros_like(z)


ACTIVATIONS: dict[str, Callable] = {
    "tanh": _tanh_derivs,
    "tanh2": _tanh2_derivs,
    "elu2": _elu2_derivs,
    "identity": _identity_derivs,
}


def activate(kind: str, z, order: int = 0):
    """Apply the ``order``-th derivative of activation ``kind`` to ``z``.

    ``order`` may be 0 or 1; the recorded local partial is the next
    derivative, so a first-derivative node can still be reverse-swept.
    """
    try:
        derivs = ACTIVATIONS[kind]
    except KeyError:
        raise ValueError(f"unknown activation {kind!r}") from None
    if order not in (0, 1):
        raise ValueError("only value and first derivative are supported")
    vals = derivs(value_of(z))
    if not isinstance(z, Node):
        return vals[order]
    return _record(z.tape, vals[order], [(z, vals[order + 1])])


def activate_pair(kind: str, z):
    """Activation value and first derivative sharing a single evaluation."""
    try:
        derivs = ACTIVATIONS[kind]
    except KeyError:
        raise ValueError(f"unknown activation {kind!r}") from None
    f0, f1, f2 = derivs(value_of(z))
    if not isinstance(z, Node):
        return f0, f1
    return _record(z.tape, f0, [(z, f1)]), _record(z.tape, f1, [(z, f2)])


def tanh(z):
    return activate("tanh", z)


def tanh2(z):
    return activate("tanh2", z)


def elu2(z):
    return activate("elu2", z)


_ELEMENTWISE = {
    "add": add,
    "sub": sub,
    "mul": mul,
    "div": div,
    "pow": power,
    "tanh": tanh,
    "tanh2": tanh2,
    "elu2": elu2,
}


def elementwise(op: str, *args):
    try:
        fn = _ELEMENTWISE[op]
    except KeyError:
        raise ValueError(f"unknown elementwise op {op!r}") from None
    return fn(*args)


# structural ops --------------------------------------------------------------

def matmul(a, b):
    tape = _tape_of(a, b)
    if tape is None:
        return np.matmul(a, b)
    va, vb = value_of(a), value_of(b)
    parents = []
    if isinstance(a, Node):
        parents.append((a, lambda g: g @ vb.T))
    if isinstance(b, Node):
        parents.append((b, lambda g: va.T @ g))
    return Node(tape, va @ vb, parents)


def getitem(a, idx):
    if not isinstance(a, Node):
        return np.asarray(a)[idx]
    shape = a.value.shape

    def vjp(g):
        out = np.zeros(shape)
        out[idx] = g
        return out

    return Node(a.tape, a.value[idx], [(a, vjp)])


def reduce_sum(a, axis=None):
    if not isinstance(a, Node):
        return np.sum(a, axis=axis)
    shape = a.value.shape

    def vjp(g):
        if axis is not None:
            g = np.expand_dims(g, axis)
        return np.broadcast_to(g, shape).copy()

    return Node(a.tape, a.value.sum(axis=axis), [(a, vjp)])


def dot(w, a):
    """Weighted sum ``sum_i w_i a_i`` with a constant weight vector."""
    if not isinstance(a, Node):
        return float(np.dot(w, a))
    w = np.asarray(w, dtype=np.float64)
    if a.value.shape != w.shape:
        raise ValueError(f"weights {w.shape} vs values {a.value.shape}")
    return Node(a.tape, np.dot(w, a.value), [(a, lambda g: g * w)])


# forward-mode spatial duals --------------------------------------------------

def _is_zero(t) -> bool:
    return isinstance(t, (int, float)) and t == 0.0


def _tmul(a, b):
    """Product that short-circuits python-scalar zeros and ones."""
    if _is_zero(a) or _is_zero(b):
        return 0.0
    if isinstance(a, (int, float)) and a == 1.0:
        return b
    if isinstance(b, (int, float)) and b == 1.0:
        return a
    return a * b


def _tadd(a, b):
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    return a + b


def _tneg(a):
    return 0.0 if _is_zero(a) else -a


@dataclass
class SpatialDual:
    """A field value together with its derivatives along each coordinate.

    ``tangents[i]`` is d(primal)/dx_i. Entries may be tape nodes, arrays or
    python floats; the float ``0.0`` marks a structurally zero tangent.
    """

    primal: object
    tangents: list

    @property
    def dim(self) -> int:
        return len(self.tangents)

    def _coerce(self, other) -> "SpatialDual":
        if isinstance(other, SpatialDual):
            if other.dim != self.dim:
                raise ValueError("spatial dimension mismatch")
            return other
        if isinstance(other, (int, float, np.floating)):
            return SpatialDual(float(other), [0.0] * self.dim)
        raise TypeError(
            "SpatialDual arithmetic needs a SpatialDual or a number; "
            "lift spatially varying factors with dual_lift first"
        )

    def __add__(self, other):
        o = self._coerce(other)
        return SpatialDual(
            _tadd(self.primal, o.primal),
            [_tadd(a, b) for a, b in zip(self.tangents, o.tangents)],
        )

    __radd__ = __add__

    def __neg__(self):
        return SpatialDual(_tneg(self.primal), [_tneg(t) for t in self.tangents])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return SpatialDual(
            _tmul(self.primal, o.primal),
            [
                _tadd(_tmul(ta, o.primal), _tmul(self.primal, tb))
                for ta, tb in zip(self.tangents, o.tangents)
            ],
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, SpatialDual):
            raise TypeError("division by a SpatialDual is not supported")
        return self * (1.0 / float(other))

    def col(self, j: int) -> "SpatialDual":
        """Column ``j`` of a batched (N, m) dual."""
        def take(a):
            if _is_zero(a):
                return 0.0
            return getitem(a, (slice(None), j))

        return SpatialDual(take(self.primal), [take(t) for t in self.tangents])

    def grad(self) -> list:
        return list(self.tangents)


def dual_lift(x) -> list[SpatialDual]:
    """Seed coordinates for forward-mode differentiation.

    ``x`` is a scalar, a length-d point, or an (N, d) array of points. The
    j-th returned dual has primal ``x[..., j]`` and tangent_i = delta_ij.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    d = arr.shape[-1]
    if d not in (1, 2):
        raise ValueError(f"spatial dimension must be 1 or 2, got {d}")
    out = []
    for j in range(d):
        prim = arr[..., j]
        if prim.ndim == 0:
            prim = float(prim)
        out.append(SpatialDual(prim, [1.0 if i == j else 0.0 for i in range(d)]))
    return out


def gradient(root: Node, leaves: Sequence[Node]) -> list[np.ndarray]:
    """Reverse-sweep ``root`` and return adjoints of ``leaves`` (zeros if unused)."""
    root.tape.reverse_sweep(root)
    return [
        np.zeros_like(leaf.value) if leaf.adjoint is None else np.asarray(leaf.adjoint)
        for leaf in leaves
    ]
