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

"""
Differentiable operations. Every op takes Tensors (or plain arrays
where noted), computes its result with numpy and hands the local
gradient closures to `record_op`.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from fedda.autodiff.tensor import Tensor, as_tensor, record_op
from fedda.errors import ShapeError, LabelError
from fedda.types import Union, Sequence, FloatArray, IntGrid


def _unbroadcast(grad: FloatArray, shape) -> FloatArray:
    #: Only scalar-with-tensor mixing is allowed, see `_check_same_shape`.
    if grad.shape == tuple(shape):
        return grad
    return np.asarray(grad.sum()).reshape(shape)


def _check_same_shape(a: Tensor, b: Tensor):
    if a.shape != b.shape and a.size != 1 and b.size != 1:
        raise ShapeError('shape mismatch: %s vs %s' % (a.shape, b.shape))


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_same_shape(a, b)
    return record_op(
        a.data + b.data,
        (a, b),
        (lambda g: _unbroadcast(g, a.shape), lambda g: _unbroadcast(g, b.shape))
    )


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_same_shape(a, b)
    return record_op(
        a.data - b.data,
        (a, b),
        (lambda g: _unbroadcast(g, a.shape), lambda g: -_unbroadcast(g, b.shape))
    )


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_same_shape(a, b)
    return record_op(
        a.data * b.data,
        (a, b),
        (
            lambda g: _unbroadcast(g * b.data, a.shape),
            lambda g: _unbroadcast(g * a.data, b.shape)
        )
    )


def tensor_sum(x: Tensor) -> Tensor:
    return record_op(
        np.asarray(x.data.sum()),
        (x,),
        (lambda g: np.full(x.shape, float(g)),),
    )


def reshape(x: Tensor, shape) -> Tensor:
    out = x.data.reshape(shape)
    return record_op(out, (x,), (lambda g: g.reshape(x.shape),))


def concat(tensors: Sequence[Tensor]) -> Tensor:
    """
    Flatten and join tensors into one vector.
    """

    sizes = [t.size for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def make_vjp(i):
        return lambda g: g[offsets[i]:offsets[i + 1]].reshape(tensors[i].shape)

    return record_op(
        np.concatenate([t.data.ravel() for t in tensors]) if tensors else np.zeros(0),
        tuple(tensors),
        tuple(make_vjp(i) for i in range(len(tensors)))
    )


def conv2d(input: Tensor, kernel: Tensor, bias: Tensor) -> Tensor:
    """
    3×3 cross-correlation with zero padding 1 and stride 1.

    Parameters:

        :param input (Tensor):
            Shape [C_in, H, W].

        :param kernel (Tensor):
            Shape [C_out, C_in, 3, 3].

        :param bias (Tensor):
            Shape [C_out].

    Return:

        Tensor of shape [C_out, H, W].
    """

    if input.data.ndim != 3:
        raise ShapeError('conv2d input must be [C, H, W], got %s' % (input.shape,))
    if kernel.data.ndim != 4 or kernel.shape[2:] != (3, 3):
        raise ShapeError('conv2d kernel must be [C_out, C_in, 3, 3], got %s' % (kernel.shape,))
    if kernel.shape[1] != input.shape[0]:
        raise ShapeError(
            'conv2d channel mismatch: input has %d channels, kernel expects %d'
            % (input.shape[0], kernel.shape[1])
        )
    if bias.shape != (kernel.shape[0],):
        raise ShapeError('conv2d bias must be [%d], got %s' % (kernel.shape[0], bias.shape))

    padded = np.pad(input.data, ((0, 0), (1, 1), (1, 1)))
    #: [C_in, H, W, 3, 3]
    patches = sliding_window_view(padded, (3, 3), axis=(1, 2))
    out = np.einsum('chwij,ocij->ohw', patches, kernel.data) + bias.data[:, None, None]

    def grad_input(g):
        g_padded = np.pad(g, ((0, 0), (1, 1), (1, 1)))
        g_patches = sliding_window_view(g_padded, (3, 3), axis=(1, 2))
        return np.einsum('ohwij,ocij->chw', g_patches, kernel.data[:, :, ::-1, ::-1])

    return record_op(
        out,
        (input, kernel, bias),
        (
            grad_input,
            lambda g: np.einsum('ohw,chwij->ocij', g, patches),
            lambda g: g.sum(axis=(1, 2))
        )
    )


def relu(input: Tensor) -> Tensor:
    #: Subgradient at exactly 0 is 0.
    mask = input.data > 0
    return record_op(
        np.where(mask, input.data, 0.0),
        (input,),
        (lambda g: g * mask,)
    )


def global_avg_pool(input: Tensor) -> Tensor:
    """
    Mean over the spatial axes: [C, H, W] -> [C].
    """

    if input.data.ndim != 3:
        raise ShapeError('global_avg_pool input must be [C, H, W], got %s' % (input.shape,))
    c, h, w = input.shape
    return record_op(
        input.data.mean(axis=(1, 2)),
        (input,),
        (lambda g: np.broadcast_to(g[:, None, None] / (h * w), input.shape).copy(),)
    )


def linear(input: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """
    `input @ weight.T + bias` for input [..., in], weight [out, in]
    and bias [out].
    """

    if weight.data.ndim != 2 or input.shape[-1] != weight.shape[1]:
        raise ShapeError('linear shape mismatch: input %s, weight %s' % (input.shape, weight.shape))
    if bias.shape != (weight.shape[0],):
        raise ShapeError('linear bias must be [%d], got %s' % (weight.shape[0], bias.shape))

    x2 = input.data.reshape(-1, weight.shape[1])
    out = x2 @ weight.data.T + bias.data
    out_shape = input.shape[:-1] + (weight.shape[0],)

    return record_op(
        out.reshape(out_shape),
        (input, weight, bias),
        (
            lambda g: (g.reshape(-1, weight.shape[0]) @ weight.data).reshape(input.shape),
            lambda g: g.reshape(-1, weight.shape[0]).T @ x2,
            lambda g: g.reshape(-1, weight.shape[0]).sum(axis=0)
        )
    )


def softmax(logits: FloatArray, axis: int = 0) -> FloatArray:
    shifted = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def softmax_cross_entropy(logits: Tensor, labels: IntGrid) -> Tensor:
    """
    Mean over pixels of -log softmax(logits)[label], the class
    axis being axis 0.

    Parameters:

        :param logits (Tensor):
            Shape [C, H, W] (or [C] for a single position).

        :param labels (IntGrid):
            Integer grid [H, W] with values in [0, C).
    """

    labels = np.asarray(labels)
    num_classes = logits.shape[0]
    if labels.shape != logits.shape[1:]:
        raise ShapeError('labels %s do not match logits %s' % (labels.shape, logits.shape))
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise LabelError('labels must lie in [0, %d)' % (num_classes,))

    shifted = logits.data - logits.data.max(axis=0, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=0))
    picked = np.take_along_axis(shifted, labels[None].astype(np.int64), axis=0)[0]
    n = labels.size
    loss = (log_norm - picked).sum() / n

    def grad_logits(g):
        probs = softmax(logits.data, axis=0)
        one_hot = np.zeros_like(probs)
        np.put_along_axis(one_hot, labels[None].astype(np.int64), 1.0, axis=0)
        return float(g) * (probs - one_hot) / n

    return record_op(np.asarray(loss), (logits,), (grad_logits,))


def binary_cross_entropy(logit: Tensor, target: Union[int, float, FloatArray]) -> Tensor:
    """
    -[t log σ(z) + (1 - t) log(1 - σ(z))] in the stable logit form
    max(z, 0) - z t + log(1 + exp(-|z|)), averaged over all elements
    of `logit`. For a scalar logit this is the plain BCE.
    """

    target = np.broadcast_to(np.asarray(target, dtype=np.float64), logit.shape)
    if not np.all((target == 0.0) | (target == 1.0)):
        raise LabelError('binary_cross_entropy targets must be 0 or 1')

    z = logit.data
    n = z.size
    loss = (np.maximum(z, 0.0) - z * target + np.log1p(np.exp(-np.abs(z)))).sum() / n

    def grad_logit(g):
        sigma = np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))
        return float(g) * (sigma - target) / n

    return record_op(np.asarray(loss), (logit,), (grad_logit,))


def mean_of(losses: Sequence[Tensor]) -> Tensor:
    """
    Mean of scalar tensors, summed in order.
    """

    total = losses[0]
    for loss in losses[1:]:
        total = total + loss
    return total / len(losses)
