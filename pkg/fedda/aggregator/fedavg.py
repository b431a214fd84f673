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
from fedda.aggregator.base import AggregationInput, BaseAggregator
from fedda.errors import AggregationError
from fedda.types import FloatArray


def fedavg_aggregate(input: AggregationInput) -> FloatArray:
    """
    Σ w_k θ_k / Σ w_k, elementwise, summed in client order.
    """

    total = float(sum(input.weights))
    if total <= 0:
        raise AggregationError('total aggregation weight must be positive')

    result = np.zeros_like(np.asarray(input.vectors[0], dtype=np.float64))
    for weight, vector in zip(input.weights, input.vectors):
        result += float(weight) * np.asarray(vector, dtype=np.float64)
    return result / total


class FedAvgAggregator(BaseAggregator):
    name = 'fedavg'

    def aggregate(self, input: AggregationInput) -> FloatArray:
        return fedavg_aggregate(input)
