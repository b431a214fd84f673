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

import enum
from typing import (
    TYPE_CHECKING,
    Optional,
    Any,
    Callable,
    Dict,
    Iterable,
    Iterator,
    List,
    Mapping,
    MutableMapping,
    Sequence,
    Tuple,
    Union
)
import numpy as np
from numpy.typing import NDArray

#: Dense float64 array.
FloatArray = NDArray[np.float64]

#: Integer class grid [H, W].
IntGrid = NDArray[np.int64]

#: Boolean mask [H, W].
BoolGrid = NDArray[np.bool_]


class Modality(enum.IntEnum):
    """
    Imaging modality of a sample. The integer value is the
    byte written to dataset files.
    """

    A = 0
    B = 1


class TrainMode(str, enum.Enum):
    PLAIN = 'plain'
    CYCLIC = 'cyclic'
    JOINT = 'joint'
    FEDPROX = 'fedprox'


class Algorithm(str, enum.Enum):
    FEDAVG = 'fedavg'
    KRUM = 'krum'
    FEDPROX = 'fedprox'
    FEDDA_CYCLIC = 'fedda_cyclic'
    FEDDA_JOINT = 'fedda_joint'


__all__ = [
    'TYPE_CHECKING',
    'Optional',
    'Any',
    'Callable',
    'Dict',
    'Iterable',
    'Iterator',
    'List',
    'Mapping',
    'MutableMapping',
    'Sequence',
    'Tuple',
    'Union',
    'FloatArray',
    'IntGrid',
    'BoolGrid',
    'Modality',
    'TrainMode',
    'Algorithm'
]
