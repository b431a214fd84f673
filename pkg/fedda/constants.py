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

from fedda.types import Algorithm, TrainMode

algorithms = {
    # ALGORITHM -> (LOCAL TRAINING MODE, DEFAULT SERVER AGGREGATOR)

    Algorithm.FEDAVG: (TrainMode.PLAIN, 'fedavg'),
    Algorithm.KRUM: (TrainMode.PLAIN, 'krum'),
    Algorithm.FEDPROX: (TrainMode.FEDPROX, 'fedavg'),
    Algorithm.FEDDA_CYCLIC: (TrainMode.CYCLIC, 'fedavg'),
    Algorithm.FEDDA_JOINT: (TrainMode.JOINT, 'fedavg')
}

#: Keys `sweep` accepts.
sweepable_keys = ('adv_weight', 'bank_size', 'fedprox_mu')

#: Dataset file header.
dataset_magic = b'FDAS'
dataset_version = 1

#: Bytes per float64 on the wire.
float_bytes = 8


def csv_columns(num_classes: int):
    """
    Column order of the per-round report. Only foreground
    classes get a dice / hd95 column.
    """

    classes = range(1, num_classes)
    return (
        ['round', 'client_id', 'seg_loss', 'adv_loss', 'disc_loss',
         'mean_dice', 'mean_hd95']
        + ['dice_%d' % k for k in classes]
        + ['hd95_%d' % k for k in classes]
        + ['uplink_bytes', 'downlink_bytes']
    )

#: Top-level namespaces of an experiment's seed stream.
seed_namespaces = {
    'data': 1,
    'init': 2,
    'clients': 3,
    'server': 4
}
