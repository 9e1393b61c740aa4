"""Reverse-mode automatic differentiation on numpy values.

A computation is recorded as a graph of `Var` nodes, each holding an ndarray
(or scalar) value, its parents, and a closure that pushes the adjoint to the
parents.  `Var.backward()` replays the graph once in reverse topological
order.  Elementary operations broadcast like numpy; adjoints are summed back
to the parent's shape.

Losses are differentiated with respect to flow parameters through a small
protocol rather than a concrete type: any object with `pack()`,
`with_vector(theta)` and `taped()` works (see `flow.FlowParams`).  Gradients
are deterministic: identical inputs replay an identical graph.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Var", "exp", "tanh", "atanh", "clip", "gradient", "finite_diff_gradient"]


def _sum_to_shape(grad, shape):
    """Reduce a broadcast adjoint back to the original operand shape."""
    grad = np.asarray(grad)
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Var:
    """One value in a recorded computation."""

    __slots__ = ("value", "grad", "_parents", "_push")

    # Defer mixed ndarray/Var arithmetic to the reflected operators below.
    __array_ufunc__ = None

    def __init__(self, value, parents=(), push=None):
        self.value = np.asarray(value, dtype=float)
        self.grad = None
        self._parents = parents
        self._push = push

    def __repr__(self):
        return f"Var(value={self.value!r})"

    # -- graph replay ------------------------------------------------------

    def _accumulate(self, delta):
        delta = _sum_to_shape(delta, self.value.shape)
        self.grad = delta if self.grad is None else self.grad + delta

    def backward(self):
        """Propagate d(self)/d(leaf) to every node reachable from self."""
        if self.value.size != 1:
            raise ValueError(f"backward() needs a scalar output, got shape {self.value.shape}")
        order = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))
        for node in order:
            node.grad = None
        self.grad = np.ones_like(self.value)
        for node in reversed(order):
            if node._push is not None and node.grad is not None:
                node._push(node.grad)

    def grad_or_zero(self):
        return np.zeros_like(self.value) if self.grad is None else self.grad

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Var):
            out = Var(self.value + other, (self,))
            out._push = lambda g: self._accumulate(g)
            return out
        out = Var(self.value + other.value, (self, other))

        def push(g):
            self._accumulate(g)
            other._accumulate(g)

        out._push = push
        return out

    __radd__ = __add__

    def __mul__(self, other):
        if not isinstance(other, Var):
            const = np.asarray(other, dtype=float)
            out = Var(self.value * const, (self,))
            out._push = lambda g: self._accumulate(g * const)
            return out
        out = Var(self.value * other.value, (self, other))

        def push(g):
            self._accumulate(g * other.value)
            other._accumulate(g * self.value)

        out._push = push
        return out

    __rmul__ = __mul__

    def __neg__(self):
        out = Var(-self.value, (self,))
        out._push = lambda g: self._accumulate(-g)
        return out

    def __sub__(self, other):
        return self + (-other if isinstance(other, Var) else -np.asarray(other, dtype=float))

    def __rsub__(self, other):
        return (-self) + other

    def __truediv__(self, other):
        if not isinstance(other, Var):
            return self * (1.0 / np.asarray(other, dtype=float))
        out = Var(self.value / other.value, (self, other))

        def push(g):
            self._accumulate(g / other.value)
            other._accumulate(-g * out.value / other.value)

        out._push = push
        return out

    def __rtruediv__(self, other):
        const = np.asarray(other, dtype=float)
        out = Var(const / self.value, (self,))
        out._push = lambda g: self._accumulate(-g * out.value / self.value)
        return out

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError(f"only non-negative integer powers are supported, got {k!r}")
        out = Var(self.value**k, (self,))
        if k == 0:
            out._push = lambda g: self._accumulate(np.zeros_like(self.value))
        else:
            out._push = lambda g: self._accumulate(g * k * self.value ** (k - 1))
        return out

    # -- elementary functions ----------------------------------------------

    def exp(self):
        out = Var(np.exp(self.value), (self,))
        out._push = lambda g: self._accumulate(g * out.value)
        return out

    def tanh(self):
        out = Var(np.tanh(self.value), (self,))
        out._push = lambda g: self._accumulate(g * (1.0 - out.value**2))
        return out

    def atanh(self):
        out = Var(np.arctanh(self.value), (self,))
        out._push = lambda g: self._accumulate(g / (1.0 - self.value**2))
        return out

    def clip(self, lo, hi):
        """Clamp to [lo, hi]; the adjoint passes through strictly inside."""
        inside = (self.value > lo) & (self.value < hi)
        out = Var(np.clip(self.value, lo, hi), (self,))
        out._push = lambda g: self._accumulate(g * inside)
        return out

    def sum(self, axis=None):
        out = Var(self.value.sum(axis=axis), (self,))
        if axis is None:
            out._push = lambda g: self._accumulate(np.broadcast_to(g, self.value.shape))
        else:
            out._push = lambda g: self._accumulate(
                np.broadcast_to(np.expand_dims(g, axis), self.value.shape)
            )
        return out

    def reshape(self, shape):
        out = Var(self.value.reshape(shape), (self,))
        out._push = lambda g: self._accumulate(np.asarray(g).reshape(self.value.shape))
        return out


# -- duck-typed helpers so flow code runs on Var or plain ndarrays ---------


def exp(x):
    return x.exp() if isinstance(x, Var) else np.exp(x)


def tanh(x):
    return x.tanh() if isinstance(x, Var) else np.tanh(x)


def atanh(x):
    return x.atanh() if isinstance(x, Var) else np.arctanh(x)


def clip(x, lo, hi):
    return x.clip(lo, hi) if isinstance(x, Var) else np.clip(x, lo, hi)


# -- gradients of losses over flow parameters -------------------------------


def gradient(loss, params):
    """Evaluate `loss` and its gradient with respect to every parameter.

    `loss` takes a params-like object and returns a scalar; it is replayed
    here on a taped view of `params`, so it must be written in terms of the
    elementary operations above.  Returns (loss value, flat gradient) with
    entries in `params.pack()` order.
    """
    view, leaves = params.taped()
    out = loss(view)
    if not isinstance(out, Var):
        raise TypeError("loss did not propagate taped values; got a plain number")
    if not np.isfinite(out.value):
        raise FloatingPointError(f"loss evaluated to a non-finite value: {out.value}")
    out.backward()
    grad = np.concatenate([np.ravel(leaf.grad_or_zero()) for leaf in leaves])
    if not np.all(np.isfinite(grad)):
        bad = int(np.flatnonzero(~np.isfinite(grad))[0])
        raise FloatingPointError(f"non-finite adjoint at parameter index {bad}")
    return float(out.value), grad


def finite_diff_gradient(loss, params, step: float) -> np.ndarray:
    """Central-difference gradient of `loss`, one parameter at a time."""
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    theta = params.pack()
    grad = np.empty_like(theta)
    for i in range(theta.size):
        up = theta.copy()
        up[i] += step
        down = theta.copy()
        down[i] -= step
        grad[i] = (loss(params.with_vector(up)) - loss(params.with_vector(down))) / (2.0 * step)
    return grad
