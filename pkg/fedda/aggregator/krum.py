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
from fedda.aggregator.base import AggregationInput, BaseAggregator
from fedda.errors import AggregationError
from fedda.logger import logger
from fedda.types import FloatArray, List


@dataclasses.dataclass(frozen=True)
class KrumSelection:
    client_id: int
    vector: FloatArray
    scores: List[float]


def krum_scores(input: AggregationInput) -> List[float]:
    """
    For every client, the sum of squared distances to its
    K - f - 2 nearest other updates.
    """

    k = len(input.vectors)
    neighbours = k - input.krum_f - 2
    if neighbours < 1:
        raise AggregationError(
            'krum needs K >= f + 3 clients, got K=%d with f=%d' % (k, input.krum_f)
        )

    m = input.matrix()
    diffs = m[:, None, :] - m[None, :, :]
    distances = (diffs * diffs).sum(axis=2)
    scores = []
    for i in range(k):
        others = np.sort(np.delete(distances[i], i))
        scores.append(float(others[:neighbours].sum()))
    return scores


def krum_select(input: AggregationInput) -> KrumSelection:
    """
    The update with the lowest Krum score, returned unmodified.
    Ties go to the lowest position, i.e. the lowest client id when
    clients are passed in ascending order.
    """

    scores = krum_scores(input)
    best = int(np.argmin(scores))
    return KrumSelection(
        client_id=int(input.client_ids[best]),
        vector=np.asarray(input.vectors[best], dtype=np.float64).copy(),
        scores=scores
    )


class KrumAggregator(BaseAggregator):
    name = 'krum'

    def aggregate(self, input: AggregationInput) -> FloatArray:
        selection = krum_select(input)
        logger.debug('Krum selected client {c}', c=selection.client_id)
        return selection.vector
