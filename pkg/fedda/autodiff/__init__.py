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

from fedda.autodiff.tensor import (
    Tensor,
    Tape,
    backward,
    active_tape
)
from fedda.autodiff.functional import (
    add,
    sub,
    mul,
    concat,
    conv2d,
    relu,
    global_avg_pool,
    linear,
    softmax,
    softmax_cross_entropy,
    binary_cross_entropy,
    mean_of
)
from fedda.autodiff.optim import (
    AdamState,
    ParamGroup,
    adam_step
)

__all__ = [
    'Tensor', 'Tape', 'backward', 'active_tape', 'add', 'sub', 'mul',
    'concat', 'conv2d', 'relu', 'global_avg_pool', 'linear', 'softmax',
    'softmax_cross_entropy', 'binary_cross_entropy', 'mean_of',
    'AdamState', 'ParamGroup', 'adam_step'
]
