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

from fedda.aggregator.base import AggregationInput, BaseAggregator
from fedda.aggregator.fedavg import FedAvgAggregator, fedavg_aggregate
from fedda.aggregator.krum import KrumAggregator, KrumSelection, krum_scores, krum_select
from fedda.aggregator.fedprox import FedProxAggregator, proximal_term
from fedda.errors import EnumValueError

_available_aggregators = {
    cls.name: cls for cls in (FedAvgAggregator, KrumAggregator, FedProxAggregator)
}


def get_aggregator(name: str, **options) -> BaseAggregator:
    """
    Instantiate a registered aggregator by name.
    """

    if name not in _available_aggregators:
        raise EnumValueError('"%s" is not a known aggregator; choose from %s' % (name, sorted(_available_aggregators)))
    return _available_aggregators[name](**options)


__all__ = [
    'AggregationInput', 'BaseAggregator', 'FedAvgAggregator',
    'KrumAggregator', 'FedProxAggregator', 'KrumSelection',
    'fedavg_aggregate', 'krum_scores', 'krum_select', 'proximal_term',
    'get_aggregator'
]
