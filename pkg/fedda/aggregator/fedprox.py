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

import numpy as np
from fedda.aggregator.fedavg import FedAvgAggregator
from fedda.autodiff import Tensor, concat
from fedda.errors import ShapeError, ValueRangeError
from fedda.types import FloatArray, Sequence, Union


def proximal_term(
    local: Union[Tensor, Sequence[Tensor]],
    global_ref: Union[FloatArray, Sequence[FloatArray]],
    mu: float
) -> Tensor:
    """
    (mu / 2)·‖local − global_ref‖², differentiable w.r.t. `local`.

    Parameters:

        :param local (Tensor | list of Tensor):
            The client's current segmentation parameters, either as
            one flat vector or as tensors flattened in order.

        :param global_ref (array | list of array):
            The round's broadcast parameters, in the same layout.

        :param mu (float):
            Proximal coefficient, mu >= 0.
    """

    if mu < 0:
        raise ValueRangeError('mu must be non-negative, got %r' % (mu,))

    if isinstance(local, Tensor):
        vector = local.reshape(-1)
        reference = np.asarray(global_ref, dtype=np.float64).ravel()
    else:
        vector = concat(list(local))
        reference = np.concatenate([np.asarray(g, dtype=np.float64).ravel() for g in global_ref])

    if vector.shape != reference.shape:
        raise ShapeError('proximal term length mismatch: %s vs %s' % (vector.shape, reference.shape))

    diff = vector - reference
    return (diff * diff).sum() * (mu / 2.0)


class FedProxAggregator(FedAvgAggregator):
    """
    FedProx changes local training only; the server side is the
    weighted average.
    """

    name = 'fedprox'
