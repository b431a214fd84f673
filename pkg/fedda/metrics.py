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

"""
Per-class Dice and HD95 over argmax predictions.
"""

import dataclasses
import math
import numpy as np
from scipy import ndimage
from scipy.spatial.distance import cdist
from fedda.errors import ProtocolError, ShapeError
from fedda.logger import logger
from fedda.model import ModelConfig, Params, predict
from fedda.types import BoolGrid, IntGrid, List, Sequence

#: 4-connectivity structuring element.
_cross = ndimage.generate_binary_structure(2, 1)


@dataclasses.dataclass(frozen=True)
class ClassMetrics:
    """
    Global-test metrics. Index i of `dice` / `hd95` is foreground
    class i + 1. `sentinels` counts (sample, class) pairs whose HD95
    fell back to the grid diagonal because exactly one mask was empty.
    """

    dice: List[float]
    hd95: List[float]
    mean_dice: float
    mean_hd95: float
    sentinels: int = 0

    @classmethod
    def from_classes(cls, dice: Sequence[float], hd95: Sequence[float], sentinels: int = 0):
        return cls(
            dice=[float(d) for d in dice],
            hd95=[float(h) for h in hd95],
            mean_dice=float(np.mean(dice)),
            mean_hd95=float(np.mean(hd95)),
            sentinels=int(sentinels)
        )


def _check_shapes(pred, truth):
    if np.shape(pred) != np.shape(truth):
        raise ShapeError('mask shapes differ: %s vs %s' % (np.shape(pred), np.shape(truth)))


def dice(pred: BoolGrid, truth: BoolGrid) -> float:
    """
    2|P ∩ T| / (|P| + |T|); 1.0 when both masks are empty.
    """

    _check_shapes(pred, truth)
    pred, truth = np.asarray(pred, dtype=bool), np.asarray(truth, dtype=bool)
    total = int(pred.sum()) + int(truth.sum())
    if total == 0:
        return 1.0
    return 2.0 * int(np.logical_and(pred, truth).sum()) / total


def boundary(mask: BoolGrid) -> BoolGrid:
    """
    Foreground pixels with a 4-neighbour outside the mask; pixels on
    the image border always count as boundary.
    """

    mask = np.asarray(mask, dtype=bool)
    eroded = ndimage.binary_erosion(mask, structure=_cross, border_value=0)
    return mask & ~eroded


def hd95(pred: BoolGrid, truth: BoolGrid) -> float:
    """
    95th percentile (nearest rank) of the union of both directed
    nearest-boundary distance sets. 0.0 when both masks are empty,
    the grid diagonal when exactly one is.
    """

    _check_shapes(pred, truth)
    pred, truth = np.asarray(pred, dtype=bool), np.asarray(truth, dtype=bool)
    has_pred, has_truth = pred.any(), truth.any()
    if not has_pred and not has_truth:
        return 0.0
    if has_pred != has_truth:
        return sentinel(pred.shape)

    a = np.argwhere(boundary(pred)).astype(np.float64)
    b = np.argwhere(boundary(truth)).astype(np.float64)
    distances = cdist(a, b)
    union = np.sort(np.concatenate([distances.min(axis=1), distances.min(axis=0)]))
    rank = math.ceil(0.95 * union.size)
    return float(union[rank - 1])


def sentinel(shape) -> float:
    return float(math.sqrt(sum(s * s for s in shape)))


def score_predictions(preds: Sequence[IntGrid], truths: Sequence[IntGrid], num_classes: int) -> ClassMetrics:
    """
    Macro average: per-sample metric for every foreground class,
    then the mean over samples (summed in sample order), then the
    mean over classes.
    """

    if not len(preds):
        raise ProtocolError('cannot score an empty test set')

    dice_sum = np.zeros(num_classes - 1)
    hd_sum = np.zeros(num_classes - 1)
    sentinels = 0
    for pred, truth in zip(preds, truths):
        for k in range(1, num_classes):
            p, t = pred == k, truth == k
            dice_sum[k - 1] += dice(p, t)
            hd_sum[k - 1] += hd95(p, t)
            if p.any() != t.any():
                sentinels += 1

    n = len(preds)
    if sentinels:
        logger.debug('HD95 fell back to the grid diagonal {s} times', s=sentinels)
    return ClassMetrics.from_classes(dice_sum / n, hd_sum / n, sentinels)


def evaluate_global(params: Params, test: Sequence, cfg: ModelConfig) -> ClassMetrics:
    """
    Segment every test sample with `params` and score the argmax
    against its mask.

    Parameters:

        :param params (ParamSet):
            Only the segmentation group is read.

        :param test (list of Sample):
            The unified global test set.

        :param cfg (ModelConfig):
            Fixes the number of classes and the expected image shape.
    """

    if not len(test):
        raise ProtocolError('the global test set is empty')

    preds = []
    for sample in test:
        if sample.image.shape != cfg.image_shape:
            raise ShapeError('test image shape %s, model expects %s' % (sample.image.shape, cfg.image_shape))
        preds.append(predict(params, sample.image))
    return score_predictions(preds, [s.mask for s in test], cfg.num_classes)
