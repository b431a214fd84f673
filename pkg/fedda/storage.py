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

import pathlib
from fedda.data import DataConfig, FederatedSplit, Modality
from fedda.errors import DatasetFormatError
from fedda.logger import logger
from fedda.serializer import DatasetSerializer
from fedda.types import Union


class Storage:
    """
    Base class for all storage.
    """

    def read(self):
        raise NotImplementedError

    def write(self, data):
        raise NotImplementedError


class DatasetStorage(Storage):
    """
    Stores a `FederatedSplit` as one FDAS file.

    Samples are written client by client in ascending client id,
    followed by the global test set. The file itself has no notion
    of clients, so reading needs the `DataConfig` that produced the
    split to cut the flat list back into client datasets.

    Example:

        >>> storage = DatasetStorage('split.fdas', data_cfg)
        >>> storage.write(make_split(SeedStream(42), data_cfg))
        >>> split = storage.read()

    """

    def __init__(self, path: Union[str, pathlib.Path], cfg: DataConfig):
        self.path = pathlib.Path(path)
        self.cfg = cfg
        self.serializer = DatasetSerializer(cfg.image_size, cfg.num_classes)

    def write(self, split: FederatedSplit) -> int:
        """
        Write the split and return the number of bytes written.
        """

        payload = self.serializer.dumps(split.all_samples())
        try:
            with open(self.path, 'wb') as f:
                f.write(payload)
        except OSError as e:
            raise OSError(e.errno, 'cannot write dataset "%s": %s' % (self.path, e.strerror)) from e

        logger.debug('Wrote {n} samples -> {p} ({b} bytes)', n=len(split.all_samples()), p=self.path, b=len(payload))
        return len(payload)

    def read(self) -> FederatedSplit:
        try:
            with open(self.path, 'rb') as f:
                samples = self.serializer.loads(f.read())
        except OSError as e:
            raise OSError(e.errno, 'cannot read dataset "%s": %s' % (self.path, e.strerror)) from e

        sizes = [len(share) for share in self.cfg.client_shares()]
        test_size = self.cfg.test_patients * len(Modality)
        if len(samples) != sum(sizes) + test_size:
            raise DatasetFormatError(
                '"%s" holds %d samples, the config describes %d'
                % (self.path, len(samples), sum(sizes) + test_size)
            )

        clients, offset = [], 0
        for size in sizes:
            clients.append(samples[offset:offset + size])
            offset += size
        return FederatedSplit(client_datasets=clients, global_test=samples[offset:])
