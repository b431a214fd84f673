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

import dataclasses
import numpy as np
from fedda.autodiff.tensor import Tensor
from fedda.errors import ConfigError, GradientError
from fedda.types import Dict, Mapping, FloatArray, Tuple

#: Trainable parameters addressed by name.
ParamGroup = Mapping[str, Tensor]


@dataclasses.dataclass
class AdamState:
    """
    Moments and step counter of one Adam optimizer. Weight decay
    is decoupled: it shrinks the weights directly and never enters
    the moment estimates.
    """

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    t: int = 0
    m: Dict[str, FloatArray] = dataclasses.field(default_factory=dict)
    v: Dict[str, FloatArray] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if self.lr <= 0:
            raise ConfigError('learning rate must be positive, got %r' % (self.lr,))
        if self.weight_decay < 0:
            raise ConfigError('weight decay must be non-negative, got %r' % (self.weight_decay,))

    def copy(self) -> 'AdamState':
        return dataclasses.replace(
            self,
            m={k: v.copy() for k, v in self.m.items()},
            v={k: v.copy() for k, v in self.v.items()}
        )


def adam_step(params: ParamGroup, state: AdamState) -> Tuple[Dict[str, FloatArray], AdamState]:
    """
    One bias-corrected Adam update with decoupled weight decay.

    Parameters:

        :param params (ParamGroup):
            Tensors whose `grad` was populated by a backward pass.

        :param state (AdamState):
            The optimizer state, left untouched.

    Return:

        The updated weights (new arrays, by name) and the new state.
    """

    for name, tensor in params.items():
        if tensor.grad is None:
            raise GradientError('parameter "%s" has no gradient' % (name,))

    state = state.copy()
    state.t += 1
    lr, b1, b2 = state.lr, state.beta1, state.beta2
    correction1 = 1.0 - b1 ** state.t
    correction2 = 1.0 - b2 ** state.t

    updated = {}
    for name, tensor in params.items():
        grad = tensor.grad
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None or m.shape != grad.shape:
            m = np.zeros_like(grad)
            v = np.zeros_like(grad)

        m = b1 * m + (1.0 - b1) * grad
        v = b2 * v + (1.0 - b2) * grad * grad
        state.m[name] = m
        state.v[name] = v

        m_hat = m / correction1
        v_hat = v / correction2
        weights = tensor.data * (1.0 - lr * state.weight_decay)
        updated[name] = weights - lr * m_hat / (np.sqrt(v_hat) + state.eps)

    return updated, state
