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

import functools
import numpy as np
from fedda.logger import logger
from fedda.types import Iterable


class SeedStream:
    """
    A deterministic family of random generators. Every generator
    is keyed by the root seed plus a path of integers, so
    `SeedStream(42).spawn(3, 7)` is the same stream no matter
    when or on which thread it is created.

    Example:

        >>> root = SeedStream(42)
        >>> rng = root.child(1).spawn(0)   #: client 1, round 0
        >>> rng.integers(10)
    """

    def __init__(self, seed: int, *key: int):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)

    def child(self, *key: int) -> 'SeedStream':
        return SeedStream(self.seed, *(self.key + tuple(key)))

    def spawn(self, *key: int) -> np.random.Generator:
        path = self.key + tuple(int(k) for k in key)
        #: SeedSequence zero-pads short entropy; the trailing length
        #: keeps (1,) and (1, 0) apart.
        entropy = [self.seed, *path, len(path)]
        return np.random.default_rng(np.random.SeedSequence(entropy))

    def __eq__(self, other):
        return (
            isinstance(other, SeedStream)
            and (self.seed, self.key) == (other.seed, other.key)
        )

    def __hash__(self):
        return hash((self.seed, self.key))

    def __repr__(self):
        return '<SeedStream seed=%d key=%s>' % (self.seed, self.key)


def catch_exceptions(decorator=None):
    """
    Log any exception escaping the wrapped function through loguru
    and re-raise it, so callers still see the failure.
    """

    if not decorator:
        decorator = logger.catch(reraise=True)

    def deco(func):
        return functools.wraps(func)(decorator(func))

    return deco


def format_float(value: float) -> str:
    """
    17 significant digits; `float(format_float(x)) == x` for
    every finite double.
    """
    return format(float(value), '.17g')


def batched(items: Iterable, size: int):
    """
    Yield consecutive lists of `size` items, the last one
    possibly shorter.
    """
    batch = []
    for item in items:
        batch.append(item)
        if len(batch) == size:
            yield batch
            batch = []
    if batch:
        yield batch
