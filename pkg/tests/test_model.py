import math
import numpy as np
import pytest
from fedda.autodiff import Tensor
from fedda.errors import ConfigError, ShapeError
from fedda.model import (
    FeatureMap,
    ModelConfig,
    ParamSet,
    build_model,
    decode,
    discriminate,
    extract_features,
    groups,
    predict,
    segment
)


def test_default_parameter_counts():
    params = build_model(ModelConfig(), np.random.default_rng(0))
    assert params.count('backbone') == 664
    assert params.count('decoder') == 219
    assert params.count('discriminator') == 297
    assert params.flatten_segmentation().shape == (883,)


def test_every_name_belongs_to_exactly_one_group(small_params):
    seen = []
    for group in groups:
        seen += small_params.names(group)
    assert sorted(seen) == sorted(small_params)
    assert set(small_params.segmentation()).isdisjoint(small_params.discriminator())


def test_build_is_deterministic(small_model_cfg):
    a = build_model(small_model_cfg, np.random.default_rng(9))
    b = build_model(small_model_cfg, np.random.default_rng(9))
    c = build_model(small_model_cfg, np.random.default_rng(10))
    assert a == b
    assert a != c


def test_initialisation(small_params):
    assert small_params['discriminator.fc.weight'].any()
    for name, array in small_params.items():
        if name.endswith('.bias'):
            assert not array.any()
        else:
            bound = math.sqrt(6.0 / np.prod(array.shape[1:]))
            assert np.abs(array).max() <= bound


def test_flatten_roundtrip(small_params):
    vector = small_params.flatten_segmentation()
    assert small_params.unflatten_segmentation(vector) == small_params
    with pytest.raises(ShapeError):
        small_params.unflatten_segmentation(vector[:-1])


def test_params_are_read_only(small_params):
    with pytest.raises(ValueError):
        small_params['decoder.conv.bias'][0] = 1.0


def test_replace_validates(small_params):
    with pytest.raises(ShapeError):
        small_params.replace({'decoder.conv.nope': np.zeros(3)})
    with pytest.raises(ShapeError):
        small_params.replace({'decoder.conv.bias': np.zeros(4)})
    changed = small_params.replace({'decoder.conv.bias': np.ones(3)})
    assert changed['decoder.conv.bias'].tolist() == [1.0, 1.0, 1.0]
    assert not small_params['decoder.conv.bias'].any()


def test_bind_marks_trainable_groups(small_params):
    tensors = small_params.bind(trainable=('discriminator',))
    for name, tensor in tensors.items():
        assert tensor.requires_grad == name.startswith('discriminator.')


def test_forward_shapes(small_params, rng):
    image = rng.uniform(size=(1, 8, 8))
    features = extract_features(small_params, image)
    assert features.shape == (4, 8, 8)
    assert (features.data >= 0).all()
    assert segment(small_params, image).shape == (3, 8, 8)
    assert discriminate(small_params, features).shape == ()
    labels = predict(small_params, image)
    assert labels.shape == (8, 8)
    assert labels.min() >= 0 and labels.max() < 3


def test_zeroed_head_scores_zero(small_params, rng):
    params = small_params.replace({'discriminator.fc.weight': np.zeros((1, 4))})
    features = extract_features(params, rng.uniform(size=(1, 8, 8)))
    assert discriminate(params, features).item() == 0.0
    assert discriminate(small_params, features).item() != 0.0


def test_decoder_oracle(small_params, rng):
    bias = np.array([0.5, -1.0, 2.0])
    params = small_params.replace({
        'decoder.conv.weight': np.zeros((3, 4, 3, 3)),
        'decoder.conv.bias': bias
    })
    logits = decode(params, Tensor(rng.normal(size=(4, 8, 8))))
    np.testing.assert_array_equal(logits.data, np.broadcast_to(bias[:, None, None], (3, 8, 8)))
    assert (predict(params, rng.uniform(size=(1, 8, 8))) == 2).all()


def test_input_shape_errors(small_params):
    with pytest.raises(ShapeError):
        extract_features(small_params, np.zeros((2, 8, 8)))
    with pytest.raises(ShapeError):
        extract_features(small_params, np.zeros((8, 8)))
    with pytest.raises(ShapeError):
        discriminate(small_params, np.zeros((3, 8, 8)))


def test_configured_forwards_check_height_and_width(small_params, small_model_cfg):
    image = np.zeros((1, 8, 8))
    features = extract_features(small_params, image, small_model_cfg)
    assert discriminate(small_params, features, small_model_cfg).shape == ()
    with pytest.raises(ShapeError):
        extract_features(small_params, np.zeros((1, 8, 10)), small_model_cfg)
    with pytest.raises(ShapeError):
        discriminate(small_params, np.zeros((4, 6, 6)), small_model_cfg)


def test_discriminator_does_not_touch_the_segmentation_path(small_params, rng):
    image = rng.uniform(size=(1, 8, 8))
    perturbed = small_params.replace({
        name: array + rng.normal(size=array.shape)
        for name, array in small_params.discriminator().items()
    })
    assert perturbed != small_params
    assert segment(perturbed, image).data.tolist() == segment(small_params, image).data.tolist()
    assert predict(perturbed, image).tolist() == predict(small_params, image).tolist()


def test_feature_map_is_frozen():
    fmap = FeatureMap(np.ones((2, 3, 3)), client_id=1, round=0)
    with pytest.raises(ValueError):
        fmap.data[0, 0, 0] = 5.0
    with pytest.raises(ShapeError):
        FeatureMap(np.ones((3, 3)), client_id=1, round=0)


def test_model_config_validation():
    with pytest.raises(ConfigError):
        ModelConfig(image_size=4)
    with pytest.raises(ConfigError):
        ModelConfig(num_classes=1)
    assert ModelConfig().feature_shape == (8, 16, 16)


def test_paramset_rejects_unknown_groups():
    with pytest.raises(ShapeError):
        ParamSet({'encoder.weight': np.zeros(2)})
