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
from fedda.errors import ShapeError, TruncatedPayloadError
from fedda.serializer.base import BaseSerializer
from fedda.types import Dict, Mapping, Sequence, FloatArray, Tuple


class ParamSerializer(BaseSerializer):
    """
    Named, ordered, length-prefixed parameter collections.

    Layout (little endian):

        u32 entry count
        per entry:
            u16 name length, utf-8 name
            u8  ndim, u32 per dimension
            float64 payload, row major

    Example:

        >>> codec = ParamSerializer()
        >>> raw = codec.dumps(params.segmentation())
        >>> codec.loads(raw)
        {'backbone.conv1.weight': array(...), ...}

    """

    def dumps(self, arrays: Mapping[str, FloatArray]) -> bytes:
        chunks = [struct.pack('<I', len(arrays))]
        for name, array in arrays.items():
            array = np.asarray(array, dtype='<f8')
            encoded = name.encode('utf-8')
            chunks.append(struct.pack('<H', len(encoded)))
            chunks.append(encoded)
            chunks.append(struct.pack('<B', array.ndim))
            chunks.append(struct.pack('<%dI' % array.ndim, *array.shape))
            chunks.append(array.tobytes(order='C'))
        return b''.join(chunks)

    def loads(self, data: bytes) -> Dict[str, FloatArray]:
        view = memoryview(data)
        offset = 0

        def take(size):
            nonlocal offset
            if offset + size > len(view):
                raise TruncatedPayloadError('parameter payload ends at byte %d, needed %d more' % (len(view), offset + size - len(view)))
            chunk = view[offset:offset + size]
            offset += size
            return chunk

        (count,) = struct.unpack('<I', take(4))
        arrays = {}
        for _ in range(count):
            (length,) = struct.unpack('<H', take(2))
            name = bytes(take(length)).decode('utf-8')
            (ndim,) = struct.unpack('<B', take(1))
            shape = struct.unpack('<%dI' % ndim, take(4 * ndim))
            size = int(np.prod(shape))
            arrays[name] = np.frombuffer(take(8 * size), dtype='<f8').astype(np.float64).reshape(shape)
        return arrays

    def size(self, arrays: Mapping[str, FloatArray]) -> int:
        """
        Encoded length in bytes, without encoding.
        """
        total = 4
        for name, array in arrays.items():
            total += 2 + len(name.encode('utf-8')) + 1 + 4 * np.ndim(array) + 8 * np.size(array)
        return total


class FeatureSerializer(BaseSerializer):
    """
    Feature maps travel as bare float64 payloads, one after the
    other. Their shape is fixed by the model config both ends share,
    so a map of shape [C', H, W] costs exactly C'·H·W·8 bytes.
    """

    def __init__(self, shape: Tuple[int, ...]):
        self.shape = tuple(shape)
        self.item_bytes = 8 * int(np.prod(self.shape))

    def dumps(self, maps: Sequence[FloatArray]) -> bytes:
        chunks = []
        for fmap in maps:
            fmap = np.asarray(fmap, dtype='<f8')
            if fmap.shape != self.shape:
                raise ShapeError('feature map shape %s, expected %s' % (fmap.shape, self.shape))
            chunks.append(fmap.tobytes(order='C'))
        return b''.join(chunks)

    def loads(self, data: bytes):
        if len(data) % self.item_bytes:
            raise TruncatedPayloadError('feature payload of %d bytes is not a multiple of %d' % (len(data), self.item_bytes))
        flat = np.frombuffer(data, dtype='<f8').astype(np.float64)
        return list(flat.reshape((-1,) + self.shape))

    def size(self, count: int) -> int:
        return count * self.item_bytes
