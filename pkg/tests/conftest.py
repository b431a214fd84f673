import numpy as np
import pytest
from fedda.config import ExperimentConfig
from fedda.data import DataConfig, make_split
from fedda.model import ModelConfig, build_model
from fedda.utils import SeedStream


def numeric_grad(f, x, h=1e-5):
    """
    Central differences of the scalar function `f` at `x`.
    """
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        old = x[idx]
        x[idx] = old + h
        up = f(x)
        x[idx] = old - h
        down = f(x)
        x[idx] = old
        grad[idx] = (up - down) / (2 * h)
    return grad


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def small_model_cfg():
    return ModelConfig(image_size=8, feat_channels=4, num_classes=3)


@pytest.fixture
def small_data_cfg():
    return DataConfig(image_size=8, num_classes=3, num_clients=2, train_patients=8, test_patients=2)


@pytest.fixture
def small_split(small_data_cfg):
    return make_split(SeedStream(7), small_data_cfg)


@pytest.fixture
def small_params(small_model_cfg):
    return build_model(small_model_cfg, np.random.default_rng(3))


@pytest.fixture
def tiny_cfg():
    """
    A federation small enough to run a few rounds in a test.
    """
    return ExperimentConfig(
        seed=11,
        rounds=2,
        image_size=8,
        feat_channels=4,
        train_patients=8,
        test_patients=2,
        bank_size=2,
        output=''
    )
