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

import struct
import numpy as np
from fedda.constants import dataset_magic, dataset_version
from fedda.data import Sample
from fedda.errors import (
    DatasetFormatError,
    MagicMismatchError,
    TruncatedPayloadError,
    VersionMismatchError
)
from fedda.serializer.base import BaseSerializer
from fedda.types import List, Modality, Sequence

#: magic, version u8, H u16, C u8, sample count u32
header = struct.Struct('<4sBHBI')

#: modality u8, patient id u32
sample_header = struct.Struct('<BI')


class DatasetSerializer(BaseSerializer):
    """
    The FDAS sample-list format.

        "FDAS" | u8 version (1) | u16 H | u8 C | u32 count
        per sample: u8 modality | u32 patient id
                    | H·H float32 image | H·H u8 mask

    All integers little endian. The file holds a flat list; how the
    list maps onto clients is the business of `fedda.storage`.
    """

    def __init__(self, image_size: int, num_classes: int):
        self.image_size = int(image_size)
        self.num_classes = int(num_classes)

    @property
    def sample_bytes(self) -> int:
        pixels = self.image_size * self.image_size
        return sample_header.size + 4 * pixels + pixels

    def size(self, count: int) -> int:
        return header.size + count * self.sample_bytes

    def dumps(self, samples: Sequence[Sample]) -> bytes:
        h = self.image_size
        chunks = [header.pack(dataset_magic, dataset_version, h, self.num_classes, len(samples))]
        for sample in samples:
            if sample.image.shape != (1, h, h):
                raise DatasetFormatError('sample %d has image shape %s, expected %s' % (sample.patient_id, sample.image.shape, (1, h, h)))
            chunks.append(sample_header.pack(int(sample.modality), sample.patient_id))
            chunks.append(sample.image.reshape(h, h).astype('<f4').tobytes())
            chunks.append(sample.mask.astype(np.uint8).tobytes())
        return b''.join(chunks)

    def loads(self, data: bytes) -> List[Sample]:
        if len(data) < header.size:
            raise TruncatedPayloadError('file is %d bytes, shorter than the %d byte header' % (len(data), header.size))

        magic, version, h, c, count = header.unpack_from(data, 0)
        if magic != dataset_magic:
            raise MagicMismatchError('bad magic %r, expected %r' % (magic, dataset_magic))
        if version != dataset_version:
            raise VersionMismatchError('unsupported dataset version %d, expected %d' % (version, dataset_version))
        if (h, c) != (self.image_size, self.num_classes):
            raise DatasetFormatError(
                'file holds %dx%d images with %d classes, expected %dx%d with %d'
                % (h, h, c, self.image_size, self.image_size, self.num_classes)
            )

        expected = self.size(count)
        if len(data) < expected:
            raise TruncatedPayloadError('file is %d bytes, %d samples need %d' % (len(data), count, expected))
        if len(data) > expected:
            raise DatasetFormatError('%d trailing bytes after the last sample' % (len(data) - expected,))

        pixels = h * h
        offset = header.size
        samples = []
        for _ in range(count):
            modality, patient_id = sample_header.unpack_from(data, offset)
            if modality not in tuple(Modality):
                raise DatasetFormatError('unknown modality byte %d at offset %d' % (modality, offset))
            offset += sample_header.size
            image = np.frombuffer(data, dtype='<f4', count=pixels, offset=offset)
            offset += 4 * pixels
            mask = np.frombuffer(data, dtype=np.uint8, count=pixels, offset=offset)
            offset += pixels
            samples.append(Sample(
                image=image.astype(np.float64).reshape(1, h, h),
                mask=mask.astype(np.int64).reshape(h, h),
                modality=Modality(modality),
                patient_id=int(patient_id)
            ))
        return samples
