# Copyright (c) 2026 fedda contributors

# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.

import contextvars
import numpy as np
from fedda.errors import GradientError, ShapeError
from fedda.types import (
    Optional,
    Callable,
    Sequence,
    List,
    Tuple,
    Union,
    FloatArray
)

#: The tape operations record onto. None means "no recording".
_active_tape: contextvars.ContextVar = contextvars.ContextVar(
    'fedda_active_tape', default=None
)


class Tensor:
    """
    A dense float64 array that can take part in a gradient tape.

    Tensors are created either by hand (leaves) or by the ops in
    `fedda.autodiff.functional`. An op only records itself when a
    `Tape` is active and at least one input requires a gradient,
    so code that runs outside a tape is always detached.

    Example:

        >>> x = Tensor([1.0, 2.0], requires_grad=True)
        >>> with Tape() as tape:
        >>>     loss = (x * x).sum()
        >>> backward(loss)
        >>> x.grad
        array([2., 4.])

    """

    #: Position in the tape that recorded or first saw this tensor.
    node_id: Optional[int] = None

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[FloatArray] = None
        self._tape: Optional['Tape'] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError('item() needs a single element, got shape %s' % (self.shape,))
        return float(self.data.reshape(()))

    def numpy(self) -> FloatArray:
        return self.data

    def detach(self) -> 'Tensor':
        """
        Copy of the data with no tape linkage.
        """
        return Tensor(self.data.copy())

    def __add__(self, other):
        from fedda.autodiff.functional import add
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from fedda.autodiff.functional import sub
        return sub(self, other)

    def __rsub__(self, other):
        from fedda.autodiff.functional import sub
        return sub(other, self)

    def __mul__(self, other):
        from fedda.autodiff.functional import mul
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            raise TypeError('division is only defined by a constant')
        return self * (1.0 / float(other))

    def __neg__(self):
        return self * -1.0

    def sum(self) -> 'Tensor':
        from fedda.autodiff.functional import tensor_sum
        return tensor_sum(self)

    def mean(self) -> 'Tensor':
        return self.sum() / self.data.size

    def reshape(self, *shape) -> 'Tensor':
        from fedda.autodiff.functional import reshape
        return reshape(self, shape[0] if len(shape) == 1 else shape)

    def __repr__(self):
        return '<Tensor shape=%s requires_grad=%s>' % (self.shape, self.requires_grad)


def as_tensor(value: Union['Tensor', FloatArray, float]) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


#: A local gradient: maps the gradient of the output to the
#: gradient contribution for one parent.
VJP = Callable[[FloatArray], FloatArray]


class _Node:
    __slots__ = ('tensor', 'parents', 'vjps')

    def __init__(self, tensor: Tensor, parents: Sequence[int], vjps: Sequence[VJP]):
        self.tensor = tensor
        self.parents = tuple(parents)
        self.vjps = tuple(vjps)


class Tape:
    """
    Ordered record of the operations of one forward pass.

    A tape is rebuilt for every forward pass; it is used as a
    context manager and is only visible to the thread / context
    that entered it, so clients training side by side never
    share one.

    Example:

        >>> with Tape() as tape:
        >>>     loss = some_forward(params)
        >>> tape.backward(loss)

    """

    def __init__(self):
        self.nodes: List[_Node] = []
        self._token = None

    def __enter__(self):
        self._token = _active_tape.set(self)
        return self

    def __exit__(self, *exc):
        _active_tape.reset(self._token)
        self._token = None
        return False

    def __len__(self):
        return len(self.nodes)

    def _watch(self, tensor: Tensor) -> int:
        """
        Register a leaf the first time the tape sees it.
        """
        if tensor._tape is not self:
            tensor._tape = self
            tensor.node_id = len(self.nodes)
            self.nodes.append(_Node(tensor, (), ()))
        return tensor.node_id

    def record(
        self,
        out: Tensor,
        parents: Sequence[Tensor],
        vjps: Sequence[VJP]
    ) -> Tensor:
        parent_ids = [self._watch(p) for p in parents]
        out._tape = self
        out.node_id = len(self.nodes)
        self.nodes.append(_Node(out, parent_ids, vjps))
        return out

    def backward(self, loss: Tensor):
        """
        Populate `grad` on every ancestor of `loss` that requires
        a gradient. Contributions reaching a node along several
        paths are summed.
        """

        if loss.data.size != 1:
            raise GradientError('backward needs a scalar loss, got shape %s' % (loss.shape,))

        if loss._tape is None:
            #: A constant: nothing to propagate.
            return

        if loss._tape is not self:
            raise GradientError('the loss was recorded on a different tape')

        grads = {loss.node_id: np.ones_like(loss.data)}
        for node_id in range(loss.node_id, -1, -1):
            grad = grads.pop(node_id, None)
            if grad is None:
                continue

            node = self.nodes[node_id]
            if node.tensor.requires_grad:
                node.tensor.grad = grad

            for parent_id, vjp in zip(node.parents, node.vjps):
                parent = self.nodes[parent_id].tensor
                if not parent.requires_grad:
                    continue
                contribution = vjp(grad)
                if parent_id in grads:
                    grads[parent_id] = grads[parent_id] + contribution
                else:
                    grads[parent_id] = contribution


def active_tape() -> Optional[Tape]:
    return _active_tape.get()


def record_op(
    out_data: FloatArray,
    parents: Sequence[Tensor],
    vjps: Sequence[VJP]
) -> Tensor:
    """
    Wrap an op result and, if a tape is active and any parent
    requires a gradient, record it.
    """

    tape = _active_tape.get()
    needs_grad = any(p.requires_grad for p in parents)
    out = Tensor(out_data, requires_grad=tape is not None and needs_grad)
    if out.requires_grad:
        tape.record(out, parents, vjps)
    return out


def backward(loss: Tensor):
    """
    Run the backward pass on the tape that recorded `loss`.
    """

    if loss.data.size != 1:
        raise GradientError('backward needs a scalar loss, got shape %s' % (loss.shape,))
    if loss._tape is None:
        return
    loss._tape.backward(loss)
