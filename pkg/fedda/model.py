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
The three-part segmentation model: backbone B, decoder H and the
feature discriminator D, at toy scale.

    backbone       conv3x3(1 -> C') + relu + conv3x3(C' -> C') + relu
    decoder        conv3x3(C' -> C)
    discriminator  conv3x3(C' -> 4) + relu + global-average-pool + dense(4 -> 1)
"""

import dataclasses
import numpy as np
from fedda.autodiff import (
    Tensor,
    conv2d,
    relu,
    global_avg_pool,
    linear
)
from fedda.errors import ConfigError, ShapeError
from fedda.types import (
    Dict,
    Iterable,
    Mapping,
    Optional,
    Tuple,
    Union,
    FloatArray
)

#: Width of the discriminator's hidden conv layer.
disc_hidden = 4

#: Parameter groups in serialization order.
groups = ('backbone', 'decoder', 'discriminator')

#: The groups that make up θ^S and cross the network.
segmentation_groups = ('backbone', 'decoder')


@dataclasses.dataclass(frozen=True)
class ModelConfig:
    image_size: int = 16
    in_channels: int = 1
    feat_channels: int = 8
    num_classes: int = 3

    def __post_init__(self):
        if self.image_size < 8:
            raise ConfigError('image_size must be >= 8, got %r' % (self.image_size,))
        if self.in_channels != 1:
            raise ConfigError('in_channels must be 1, got %r' % (self.in_channels,))
        if self.feat_channels < 2:
            raise ConfigError('feat_channels must be >= 2, got %r' % (self.feat_channels,))
        if self.num_classes < 2:
            raise ConfigError('num_classes must be >= 2, got %r' % (self.num_classes,))

    @property
    def image_shape(self) -> Tuple[int, int, int]:
        return (self.in_channels, self.image_size, self.image_size)

    @property
    def feature_shape(self) -> Tuple[int, int, int]:
        return (self.feat_channels, self.image_size, self.image_size)

    def param_shapes(self) -> Dict[str, Dict[str, Tuple[int, ...]]]:
        c_in, c_f, c = self.in_channels, self.feat_channels, self.num_classes
        return {
            'backbone': {
                'backbone.conv1.weight': (c_f, c_in, 3, 3),
                'backbone.conv1.bias': (c_f,),
                'backbone.conv2.weight': (c_f, c_f, 3, 3),
                'backbone.conv2.bias': (c_f,),
            },
            'decoder': {
                'decoder.conv.weight': (c, c_f, 3, 3),
                'decoder.conv.bias': (c,),
            },
            'discriminator': {
                'discriminator.conv.weight': (disc_hidden, c_f, 3, 3),
                'discriminator.conv.bias': (disc_hidden,),
                'discriminator.fc.weight': (1, disc_hidden),
                'discriminator.fc.bias': (1,),
            }
        }


class ParamSet:
    """
    All parameters of one model, partitioned into the backbone,
    decoder and discriminator groups. Arrays are addressed by their
    dotted name; the group is the prefix before the first dot.

    A ParamSet is treated as a value: updates produce a new
    ParamSet through `replace`, so a set handed to another thread
    or stored in a report never changes under it.

    Example:

        >>> params = build_model(ModelConfig(), SeedStream(42).spawn(0))
        >>> params.count('backbone')
        664
        >>> vector = params.flatten_segmentation()
        >>> params.unflatten_segmentation(vector) == params
        True

    """

    def __init__(self, arrays: Mapping[str, FloatArray]):
        self._arrays: Dict[str, FloatArray] = {}
        for name, value in arrays.items():
            group = name.split('.', 1)[0]
            if group not in groups:
                raise ShapeError('parameter "%s" belongs to no group' % (name,))
            array = np.array(value, dtype=np.float64)
            array.setflags(write=False)
            self._arrays[name] = array

    def __getitem__(self, name: str) -> FloatArray:
        return self._arrays[name]

    def __contains__(self, name: str) -> bool:
        return name in self._arrays

    def __iter__(self):
        return iter(self._arrays)

    def __len__(self):
        return len(self._arrays)

    def __eq__(self, other):
        if not isinstance(other, ParamSet) or list(self) != list(other):
            return False
        return all(np.array_equal(self[k], other[k]) for k in self)

    def __repr__(self):
        return '<ParamSet %s>' % (
            ' '.join('%s=%d' % (g, self.count(g)) for g in groups)
        )

    def items(self):
        return self._arrays.items()

    def names(self, group: Optional[Union[str, Iterable[str]]] = None):
        if group is None:
            return list(self._arrays)
        wanted = (group,) if isinstance(group, str) else tuple(group)
        return [n for n in self._arrays if n.split('.', 1)[0] in wanted]

    def group(self, group: Union[str, Iterable[str]]) -> Dict[str, FloatArray]:
        return {n: self._arrays[n] for n in self.names(group)}

    def segmentation(self) -> Dict[str, FloatArray]:
        return self.group(segmentation_groups)

    def discriminator(self) -> Dict[str, FloatArray]:
        return self.group('discriminator')

    def count(self, group: Optional[Union[str, Iterable[str]]] = None) -> int:
        return int(sum(self._arrays[n].size for n in self.names(group)))

    def replace(self, arrays: Mapping[str, FloatArray]) -> 'ParamSet':
        """
        New ParamSet with the given arrays swapped in. Unknown names
        and shape changes are rejected.
        """

        merged = dict(self._arrays)
        for name, value in arrays.items():
            if name not in merged:
                raise ShapeError('unknown parameter "%s"' % (name,))
            if np.shape(value) != merged[name].shape:
                raise ShapeError(
                    'parameter "%s" has shape %s, expected %s'
                    % (name, np.shape(value), merged[name].shape)
                )
            merged[name] = value
        return ParamSet(merged)

    def flatten_segmentation(self) -> FloatArray:
        names = self.names(segmentation_groups)
        return np.concatenate([self._arrays[n].ravel() for n in names])

    def unflatten_segmentation(self, vector: FloatArray) -> 'ParamSet':
        vector = np.asarray(vector, dtype=np.float64)
        names = self.names(segmentation_groups)
        expected = self.count(segmentation_groups)
        if vector.shape != (expected,):
            raise ShapeError('segmentation vector must have %d entries, got %s' % (expected, vector.shape))

        arrays, offset = {}, 0
        for name in names:
            shape = self._arrays[name].shape
            size = int(np.prod(shape))
            arrays[name] = vector[offset:offset + size].reshape(shape)
            offset += size
        return self.replace(arrays)

    def bind(self, trainable: Iterable[str] = ()) -> Dict[str, Tensor]:
        """
        Tensors for a forward pass. Groups listed in `trainable`
        require gradients; everything else is constant.
        """

        trainable = set(trainable)
        return {
            name: Tensor(array, requires_grad=name.split('.', 1)[0] in trainable)
            for name, array in self._arrays.items()
        }


@dataclasses.dataclass(frozen=True)
class FeatureMap:
    """
    A detached [C', H, W] activation tagged with the client that
    produced it (0 for the global model) and the round. The array
    is read-only, so nothing downstream can alter a banked map.
    """

    data: FloatArray
    client_id: int
    round: int

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 3:
            raise ShapeError('feature map must be [C, H, W], got %s' % (data.shape,))
        data.setflags(write=False)
        object.__setattr__(self, 'data', data)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape


#: Anything the forward functions accept as parameters.
Params = Union[ParamSet, Mapping[str, Tensor]]


def _tensors(params: Params) -> Mapping[str, Tensor]:
    if isinstance(params, ParamSet):
        return params.bind()
    return params


def build_model(cfg: ModelConfig, rng: np.random.Generator) -> ParamSet:
    """
    He-uniform weights and zero biases, drawn in serialization
    order so the result only depends on the generator state.
    """

    if not isinstance(cfg, ModelConfig):
        raise ConfigError('build_model needs a ModelConfig')

    arrays = {}
    for group in groups:
        for name, shape in cfg.param_shapes()[group].items():
            if name.endswith('.bias'):
                arrays[name] = np.zeros(shape)
            else:
                fan_in = int(np.prod(shape[1:]))
                bound = np.sqrt(6.0 / fan_in)
                arrays[name] = rng.uniform(-bound, bound, size=shape)
    return ParamSet(arrays)


def _as_input(value: Union[Tensor, FloatArray], what: str, expected: Optional[Tuple[int, ...]]) -> Tensor:
    value = value if isinstance(value, Tensor) else Tensor(value)
    if value.data.ndim != 3:
        raise ShapeError('%s must be [C, H, W], got %s' % (what, value.shape))
    if expected is not None and value.shape != tuple(expected):
        raise ShapeError('%s has shape %s, model expects %s' % (what, value.shape, tuple(expected)))
    return value


def extract_features(
    params: Params,
    image: Union[Tensor, FloatArray],
    cfg: Optional[ModelConfig] = None
) -> Tensor:
    """
    Backbone forward: [1, H, W] -> [C', H, W]. Differentiable when
    called under a tape with trainable backbone tensors; detached
    otherwise. With `cfg` the image must be exactly `cfg.image_shape`.
    """

    p = _tensors(params)
    w1 = p['backbone.conv1.weight']
    image = _as_input(image, 'image', cfg.image_shape if cfg is not None else None)
    if image.shape[0] != w1.shape[1]:
        raise ShapeError('image has %d channels, backbone expects %d' % (image.shape[0], w1.shape[1]))

    x = relu(conv2d(image, w1, p['backbone.conv1.bias']))
    return relu(conv2d(x, p['backbone.conv2.weight'], p['backbone.conv2.bias']))


def decode(params: Params, features: Tensor) -> Tensor:
    p = _tensors(params)
    return conv2d(features, p['decoder.conv.weight'], p['decoder.conv.bias'])


def segment(params: Params, image: Union[Tensor, FloatArray]) -> Tensor:
    """
    Class logits [C, H, W] for one image.
    """
    p = _tensors(params)
    return decode(p, extract_features(p, image))


def discriminate(
    params: Params,
    feat: Union[Tensor, FloatArray],
    cfg: Optional[ModelConfig] = None
) -> Tensor:
    """
    Discriminator logit for one feature map. σ(logit) is the
    probability of the "target" label (1). With `cfg` the map must
    be exactly `cfg.feature_shape`.
    """

    p = _tensors(params)
    feat = _as_input(feat, 'feature map', cfg.feature_shape if cfg is not None else None)
    w = p['discriminator.conv.weight']
    if feat.shape[0] != w.shape[1]:
        raise ShapeError('feature map must be [%d, H, W], got %s' % (w.shape[1], feat.shape))

    h = relu(conv2d(feat, w, p['discriminator.conv.bias']))
    pooled = global_avg_pool(h)
    return linear(pooled, p['discriminator.fc.weight'], p['discriminator.fc.bias']).reshape(())


def predict(params: Params, image: FloatArray) -> FloatArray:
    """
    Argmax class grid [H, W] for one image, outside any tape.
    """
    logits = segment(params, image).data
    return logits.argmax(axis=0)
