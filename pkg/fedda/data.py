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
Synthetic two-modality segmentation data.

Every sample is an ellipse scene: C - 1 filled ellipses, one per
foreground class, rendered as intensity levels on a dim background
and then passed through one of two modality transforms. Modality B
inverts and blurs the image, a cheap stand-in for the contrast flip
between CT and MRI.
"""

import dataclasses
import numpy as np
from scipy import ndimage
from fedda.errors import ConfigError
from fedda.types import (
    List,
    Modality,
    Optional,
    FloatArray,
    IntGrid
)
from fedda.utils import SeedStream

#: Intensity of background pixels before the modality transform.
background_level = 0.1

#: Noise standard deviation per modality.
modality_noise = {
    Modality.A: 0.05,
    Modality.B: 0.10
}

#: Valid `modality_layout` values.
layouts = ('split', 'mixed')


@dataclasses.dataclass(frozen=True)
class DataConfig:
    """
    Parameters of a federated split. Patient counts are per
    modality; the default 40 / 10 keeps the 4:1 train:test ratio.
    """

    image_size: int = 16
    num_classes: int = 3
    num_clients: int = 2
    train_patients: int = 40
    test_patients: int = 10
    modality_layout: str = 'split'
    min_radius: float = 0.15
    max_radius: float = 0.3

    def __post_init__(self):
        if self.image_size < 8:
            raise ConfigError('image_size must be >= 8, got %r' % (self.image_size,))
        if self.num_classes < 2:
            raise ConfigError('num_classes must be >= 2, got %r' % (self.num_classes,))
        if self.num_clients < 1:
            raise ConfigError('num_clients must be >= 1, got %r' % (self.num_clients,))
        if self.test_patients < 1:
            raise ConfigError('test_patients must be >= 1, got %r' % (self.test_patients,))
        if self.modality_layout not in layouts:
            raise ConfigError('modality_layout must be one of %s, got %r' % (layouts, self.modality_layout))
        if not 0 < self.min_radius <= self.max_radius < 0.5:
            raise ConfigError('radii must satisfy 0 < min_radius <= max_radius < 0.5')
        smallest = min(len(share) for share in self.client_shares())
        if smallest < 4:
            raise ConfigError(
                'every client needs at least 4 training samples; %d train patients '
                'per modality over %d clients leaves %d' % (self.train_patients, self.num_clients, smallest)
            )

    def client_modalities(self) -> List[Modality]:
        """
        Round robin: client 1 -> A, client 2 -> B, client 3 -> A, ...
        """
        return [Modality(k % 2) for k in range(self.num_clients)]

    def client_shares(self) -> List[List[tuple]]:
        """
        (modality, index within that modality's training pool) for
        every client. Clients sharing a modality split its pool
        evenly, remainders going to the lowest client ids.
        """

        shares = [[] for _ in range(self.num_clients)]
        if self.modality_layout == 'mixed':
            for modality in Modality:
                for index, part in enumerate(np.array_split(np.arange(self.train_patients), self.num_clients)):
                    shares[index].extend((modality, int(i)) for i in part)
            return shares

        modalities = self.client_modalities()
        for modality in Modality:
            owners = [k for k, m in enumerate(modalities) if m == modality]
            if not owners:
                continue
            for owner, part in zip(owners, np.array_split(np.arange(self.train_patients), len(owners))):
                shares[owner].extend((modality, int(i)) for i in part)
        return shares


@dataclasses.dataclass(frozen=True)
class Sample:
    image: FloatArray
    mask: IntGrid
    modality: Modality
    patient_id: int

    def __eq__(self, other):
        return (
            isinstance(other, Sample)
            and self.modality == other.modality
            and self.patient_id == other.patient_id
            and np.array_equal(self.image, other.image)
            and np.array_equal(self.mask, other.mask)
        )


@dataclasses.dataclass(frozen=True)
class FederatedSplit:
    client_datasets: List[List[Sample]]
    global_test: List[Sample]

    @property
    def num_clients(self) -> int:
        return len(self.client_datasets)

    def all_samples(self) -> List[Sample]:
        return [s for d in self.client_datasets for s in d] + list(self.global_test)


def render_scene(rng: np.random.Generator, cfg: DataConfig):
    """
    Mask and noiseless base image of one ellipse scene. Later
    classes overwrite earlier ones where ellipses overlap.
    """

    h = cfg.image_size
    yy, xx = np.mgrid[0:h, 0:h].astype(np.float64)
    mask = np.zeros((h, h), dtype=np.int64)
    for k in range(1, cfg.num_classes):
        cy, cx = rng.uniform(0.2 * h, 0.8 * h, size=2)
        ry, rx = rng.uniform(cfg.min_radius * h, cfg.max_radius * h, size=2)
        inside = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
        mask[inside] = k

    levels = np.minimum(0.3 * np.arange(cfg.num_classes), 1.0)
    levels[0] = background_level
    return mask, levels[mask]


def modality_transform(
    base: FloatArray,
    modality: Modality,
    rng: np.random.Generator,
    noise: Optional[float] = None
) -> FloatArray:
    """
    Apply the acquisition look of a modality to a [H, W] base image.

        A: identity + N(0, 0.05)
        B: 1 - x, 3×3 mean blur, + N(0, 0.10)

    The result is clamped to [0, 1]. `noise` overrides the
    modality's noise level.
    """

    sigma = modality_noise[Modality(modality)] if noise is None else noise
    image = np.asarray(base, dtype=np.float64)
    if modality == Modality.B:
        image = ndimage.uniform_filter(1.0 - image, size=3, mode='nearest')
    if sigma > 0:
        image = image + rng.normal(0.0, sigma, size=image.shape)
    return np.clip(image, 0.0, 1.0)


def synth_sample(
    rng: np.random.Generator,
    cfg: DataConfig,
    modality: Modality = Modality.A,
    patient_id: int = 0
) -> Sample:
    """
    One patient. The image is rounded through float32 so that it
    survives the dataset file format unchanged.
    """

    mask, base = render_scene(rng, cfg)
    image = modality_transform(base, modality, rng)
    image = image.astype(np.float32).astype(np.float64)[None]
    return Sample(image=image, mask=mask, modality=Modality(modality), patient_id=int(patient_id))


def make_split(rng: SeedStream, cfg: DataConfig) -> FederatedSplit:
    """
    Generate every patient, hand the training patients to the
    clients and pool the held-out patients of both modalities into
    the global test set.

    Patient ids are unique across the whole split: per modality the
    training patients come first, then the test patients. Each
    patient draws from its own stream keyed by its id, so the split
    is a pure function of (seed, cfg).
    """

    per_modality = cfg.train_patients + cfg.test_patients

    def patient(modality: Modality, index: int) -> Sample:
        pid = int(modality) * per_modality + index
        return synth_sample(rng.spawn(pid), cfg, modality=modality, patient_id=pid)

    clients = [
        [patient(modality, index) for modality, index in share]
        for share in cfg.client_shares()
    ]
    test = [
        patient(modality, cfg.train_patients + index)
        for modality in Modality
        for index in range(cfg.test_patients)
    ]
    return FederatedSplit(client_datasets=clients, global_test=test)
