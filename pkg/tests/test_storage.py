import struct
import numpy as np
import pytest
from fedda.data import DataConfig
from fedda.errors import (
    DatasetFormatError,
    MagicMismatchError,
    ShapeError,
    TruncatedPayloadError,
    VersionMismatchError
)
from fedda.serializer import DatasetSerializer, FeatureSerializer, ParamSerializer
from fedda.storage import DatasetStorage


def test_split_survives_the_file(tmp_path, small_data_cfg, small_split):
    storage = DatasetStorage(tmp_path / 'split.fdas', small_data_cfg)
    written = storage.write(small_split)
    restored = storage.read()

    assert written == (tmp_path / 'split.fdas').stat().st_size
    assert [len(d) for d in restored.client_datasets] == [8, 8]
    for a, b in zip(restored.all_samples(), small_split.all_samples()):
        assert a == b


def test_file_size_formula(tmp_path, small_data_cfg, small_split):
    storage = DatasetStorage(tmp_path / 'split.fdas', small_data_cfg)
    count = len(small_split.all_samples())
    assert storage.write(small_split) == 12 + count * (5 + 5 * 8 * 8)
    assert storage.serializer.size(count) == 12 + count * (5 + 5 * 8 * 8)


@pytest.fixture
def payload(small_split):
    return DatasetSerializer(8, 3).dumps(small_split.all_samples())


def test_bad_magic(payload):
    with pytest.raises(MagicMismatchError):
        DatasetSerializer(8, 3).loads(b'XXXX' + payload[4:])


def test_bad_version(payload):
    with pytest.raises(VersionMismatchError):
        DatasetSerializer(8, 3).loads(payload[:4] + bytes([2]) + payload[5:])


def test_truncated_and_trailing(payload):
    with pytest.raises(TruncatedPayloadError):
        DatasetSerializer(8, 3).loads(payload[:-1])
    with pytest.raises(TruncatedPayloadError):
        DatasetSerializer(8, 3).loads(payload[:6])
    with pytest.raises(DatasetFormatError):
        DatasetSerializer(8, 3).loads(payload + b'\x00')


def test_geometry_mismatch(payload):
    with pytest.raises(DatasetFormatError):
        DatasetSerializer(16, 3).loads(payload)


def test_unknown_modality_byte(payload):
    corrupted = bytearray(payload)
    corrupted[12] = 7
    with pytest.raises(DatasetFormatError):
        DatasetSerializer(8, 3).loads(bytes(corrupted))


def test_header_layout(payload, small_split):
    magic, version, h, c, count = struct.unpack_from('<4sBHBI', payload)
    assert (magic, version, h, c, count) == (b'FDAS', 1, 8, 3, len(small_split.all_samples()))


def test_read_with_a_different_config(tmp_path, small_data_cfg, small_split):
    path = tmp_path / 'split.fdas'
    DatasetStorage(path, small_data_cfg).write(small_split)
    other = DataConfig(image_size=8, num_classes=3, num_clients=2, train_patients=8, test_patients=3)
    with pytest.raises(DatasetFormatError):
        DatasetStorage(path, other).read()


def test_missing_file_names_the_path(tmp_path, small_data_cfg):
    path = tmp_path / 'absent.fdas'
    with pytest.raises(OSError, match='absent.fdas'):
        DatasetStorage(path, small_data_cfg).read()


def test_param_codec_size_matches_encoding(small_params):
    codec = ParamSerializer()
    arrays = small_params.segmentation()
    raw = codec.dumps(arrays)
    assert len(raw) == codec.size(arrays)
    decoded = codec.loads(raw)
    assert list(decoded) == list(arrays)
    for name in arrays:
        np.testing.assert_array_equal(decoded[name], arrays[name])
    with pytest.raises(TruncatedPayloadError):
        codec.loads(raw[:-3])


def test_feature_codec():
    codec = FeatureSerializer((2, 4, 4))
    maps = [np.arange(32.0).reshape(2, 4, 4), -np.ones((2, 4, 4))]
    raw = codec.dumps(maps)
    assert len(raw) == codec.size(2) == 2 * 2 * 16 * 8
    np.testing.assert_array_equal(codec.loads(raw)[0], maps[0])
    with pytest.raises(ShapeError):
        codec.dumps([np.zeros((3, 4, 4))])
    with pytest.raises(TruncatedPayloadError):
        codec.loads(raw[:-8])
