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
Experiment configuration: flat `key = value` text with `#` comments.

    # two clients, joint alignment
    algorithm  = fedda_joint
    adv_weight = 0.1
    rounds     = 50

Absent keys take the defaults of `ExperimentConfig`. Unknown keys,
malformed lines, out-of-range numbers and bad enum values raise
distinct `ConfigError` subclasses carrying the line number.
"""

import dataclasses
import math
import pathlib
from fedda.aggregator import _available_aggregators
from fedda.data import DataConfig, layouts
from fedda.errors import (
    ConfigSyntaxError,
    EnumValueError,
    UnknownKeyError,
    ValueRangeError
)
from fedda.model import ModelConfig
from fedda.server import AlgoConfig
from fedda.trainer import LocalTrainConfig, joint_schedules
from fedda.types import Algorithm, Any, Callable, Dict, Optional, Tuple, Union


@dataclasses.dataclass(frozen=True)
class Option:
    """
    One config key: how to parse its text and which values are
    allowed. `choices` makes it an enum key; `check` / `hint`
    describe the valid range of a numeric key.
    """

    kind: Callable[[str], Any]
    check: Optional[Callable[[Any], bool]] = None
    hint: str = ''
    choices: Optional[Tuple[str, ...]] = None


def _adv_clients(text: str):
    if text.strip() == 'all':
        return None
    try:
        return tuple(sorted({int(part) for part in text.split(',') if part.strip()}))
    except ValueError:
        raise ValueRangeError('adv_clients must be "all" or a comma list of client ids, got "%s"' % (text,)) from None


positive = (lambda v: v > 0, '> 0')
non_negative = (lambda v: v >= 0, '>= 0')


def _at_least(n):
    return (lambda v: v >= n, '>= %d' % (n,))


options: Dict[str, Option] = {
    'seed': Option(int, *non_negative),
    'num_clients': Option(int, *_at_least(1)),
    'rounds': Option(int, *non_negative),
    'algorithm': Option(str, choices=tuple(a.value for a in Algorithm)),
    'aggregator': Option(str, choices=('auto',) + tuple(_available_aggregators)),
    'lr_backbone': Option(float, *positive),
    'lr_discriminator': Option(float, *positive),
    'adv_weight': Option(float, *non_negative),
    'local_epochs': Option(int, *_at_least(1)),
    'batch_size': Option(int, *_at_least(1)),
    'weight_decay': Option(float, *non_negative),
    'disc_weight_decay': Option(float, *non_negative),
    'image_size': Option(int, *_at_least(8)),
    'feat_channels': Option(int, *_at_least(2)),
    'num_classes': Option(int, *_at_least(2)),
    'train_patients': Option(int, *_at_least(1)),
    'test_patients': Option(int, *_at_least(1)),
    'modality_layout': Option(str, choices=layouts),
    'bank_size': Option(int, *_at_least(1)),
    'krum_f': Option(int, *non_negative),
    'fedprox_mu': Option(float, *non_negative),
    'participation': Option(float, lambda v: 0 < v <= 1, 'in (0, 1]'),
    'adv_clients': Option(_adv_clients),
    'joint_targets': Option(str, choices=joint_schedules),
    'workers': Option(int, *_at_least(1)),
    'output': Option(str),
}


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """
    Every setting of one experiment. The sub-configs consumed by
    the individual modules are derived on demand and validated
    when the config is built, so an invalid combination fails
    before any training starts.
    """

    seed: int = 42
    num_clients: int = 2
    rounds: int = 100
    algorithm: str = 'fedavg'
    aggregator: str = 'auto'
    lr_backbone: float = 1e-3
    lr_discriminator: float = 1e-6
    adv_weight: float = 0.1
    local_epochs: int = 1
    batch_size: int = 4
    weight_decay: float = 1e-5
    disc_weight_decay: float = 1e-5
    image_size: int = 16
    feat_channels: int = 8
    num_classes: int = 3
    train_patients: int = 40
    test_patients: int = 10
    modality_layout: str = 'split'
    bank_size: int = 4
    krum_f: int = 1
    fedprox_mu: float = 0.01
    participation: float = 1.0
    adv_clients: Optional[Tuple[int, ...]] = None
    joint_targets: str = 'batch'
    workers: int = 1
    output: str = 'results.csv'

    def __post_init__(self):
        for name, option in options.items():
            _validate(name, option, getattr(self, name))
        self.algo_config()
        self.data_config()

    def model_config(self) -> ModelConfig:
        return ModelConfig(
            image_size=self.image_size,
            feat_channels=self.feat_channels,
            num_classes=self.num_classes
        )

    def data_config(self) -> DataConfig:
        return DataConfig(
            image_size=self.image_size,
            num_classes=self.num_classes,
            num_clients=self.num_clients,
            train_patients=self.train_patients,
            test_patients=self.test_patients,
            modality_layout=self.modality_layout
        )

    def train_config(self) -> LocalTrainConfig:
        return LocalTrainConfig(
            lr_backbone=self.lr_backbone,
            lr_discriminator=self.lr_discriminator,
            adv_weight=self.adv_weight,
            local_epochs=self.local_epochs,
            batch_size=self.batch_size,
            weight_decay=self.weight_decay,
            disc_weight_decay=self.disc_weight_decay,
            fedprox_mu=self.fedprox_mu,
            bank_size=self.bank_size,
            joint_targets=self.joint_targets
        )

    def algo_config(self, threads: int = 1) -> AlgoConfig:
        return AlgoConfig(
            algorithm=Algorithm(self.algorithm),
            num_clients=self.num_clients,
            model=self.model_config(),
            train=self.train_config(),
            aggregator=self.aggregator,
            krum_f=self.krum_f,
            participation=self.participation,
            adv_clients=self.adv_clients,
            seed=self.seed,
            threads=threads
        )

    def replace(self, **changes) -> 'ExperimentConfig':
        return dataclasses.replace(self, **changes)

    def with_value(self, key: str, text: str) -> 'ExperimentConfig':
        """
        Copy with one key set from its textual form, the way a
        config line or a command-line override would set it.
        """
        if key not in options:
            raise UnknownKeyError('unknown config key "%s"' % (key,))
        return self.replace(**{key: parse_value(key, text)})


def _validate(name: str, option: Option, value, line: Optional[int] = None):
    if option.choices is not None:
        if value not in option.choices:
            raise EnumValueError(
                '%s must be one of %s, got "%s"' % (name, ', '.join(option.choices), value), line
            )
    elif option.check is not None:
        if isinstance(value, float) and not math.isfinite(value):
            raise ValueRangeError('%s must be finite, got %r' % (name, value), line)
        if not option.check(value):
            raise ValueRangeError('%s must be %s, got %r' % (name, option.hint, value), line)


def parse_value(key: str, text: str, line: Optional[int] = None):
    """
    Parse and range-check the value of one key.
    """

    option = options[key]
    text = text.strip()
    try:
        value = option.kind(text)
    except ValueRangeError as e:
        raise ValueRangeError(str(e), line) from None
    except ValueError:
        raise ValueRangeError(
            '%s expects %s, got "%s"' % (key, 'an integer' if option.kind is int else 'a number', text), line
        ) from None
    _validate(key, option, value, line)
    return value


def parse_config(text: str) -> ExperimentConfig:
    """
    Parse config text into a validated `ExperimentConfig`.

    Parameters:

        :param text (str):
            The file content. Blank lines and everything after a
            `#` are ignored; each remaining line is `key = value`.

    Example:

        >>> parse_config('algorithm = fedda_cyclic\\nrounds = 5').algorithm
        'fedda_cyclic'
        >>> parse_config('algorithm = moon')
        Traceback (most recent call last):
        ...
        fedda.errors.EnumValueError: line 1: algorithm must be one of ...

    """

    values, seen = {}, {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigSyntaxError('expected "key = value", got "%s"' % (raw.strip(),), number)

        key, value = (part.strip() for part in line.split('=', 1))
        if key not in options:
            raise UnknownKeyError('unknown config key "%s"' % (key,), number)
        if key in seen:
            raise ConfigSyntaxError('"%s" already set on line %d' % (key, seen[key]), number)
        if not value:
            raise ConfigSyntaxError('"%s" has no value' % (key,), number)

        seen[key] = number
        values[key] = parse_value(key, value, number)

    return ExperimentConfig(**values)


def load_config(path: Union[str, pathlib.Path]) -> ExperimentConfig:
    path = pathlib.Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise OSError(e.errno, 'cannot read config "%s": %s' % (path, e.strerror)) from e
    return parse_config(text)
