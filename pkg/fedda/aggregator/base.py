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
from fedda.errors import AggregationError, ShapeError
from fedda.types import Optional, Sequence, FloatArray


@dataclasses.dataclass
class AggregationInput:
    """
    Flattened segmentation vectors of the clients taking part in a
    round, their weights w_k and their 1-based client ids.
    """

    vectors: Sequence[FloatArray]
    weights: Sequence[float]
    client_ids: Optional[Sequence[int]] = None
    krum_f: int = 1

    def __post_init__(self):
        if not len(self.vectors):
            raise AggregationError('nothing to aggregate')
        if len(self.weights) != len(self.vectors):
            raise AggregationError('%d weights for %d vectors' % (len(self.weights), len(self.vectors)))
        lengths = {np.shape(v) for v in self.vectors}
        if len(lengths) != 1 or np.ndim(self.vectors[0]) != 1:
            raise ShapeError('client vectors must be 1-D and of equal length, got %s' % (sorted(lengths),))
        if any(w < 0 for w in self.weights):
            raise AggregationError('weights must be non-negative')
        if self.krum_f < 0:
            raise AggregationError('krum_f must be non-negative')
        if self.client_ids is None:
            self.client_ids = list(range(1, len(self.vectors) + 1))

    def matrix(self) -> FloatArray:
        return np.stack([np.asarray(v, dtype=np.float64) for v in self.vectors])


class BaseAggregator:
    """
    A server-side strategy combining client segmentation vectors
    into the next global vector. Discriminator parameters never
    reach an aggregator.
    """

    #: Registry name.
    name: str = None

    def __init__(self, **options):
        self.options = options

    def aggregate(self, input: AggregationInput) -> FloatArray:
        raise NotImplementedError
