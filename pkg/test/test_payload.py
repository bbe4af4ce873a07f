import os
import struct
import tempfile
import unittest

import numpy as np
from parameterized import parameterized

from fedshift.exceptions import CorruptionError, OutputError
from fedshift.model.network import ModelSpec, init_params
from fedshift.quantization.codec import quantize_params
from fedshift.quantization.payload import (MAGIC, deserialize_payload, full_precision_size, overhead_size,
                                           pack_indices, payload_size, read_payload, serialize_payload,
                                           transfer_efficiency, unpack_indices, write_payload)
from fedshift.quantization.types import SCHEME_KMEANS, SCHEME_UNIFORM
from test.helpers import FixtureHelper


def _reference_model():
    return init_params(ModelSpec(input_dim=20, hidden_dims=[32], num_classes=10), 0)


class TestPayload(unittest.TestCase):
    @parameterized.expand([
        (SCHEME_UNIFORM, 1),
        (SCHEME_UNIFORM, 5),
        (SCHEME_UNIFORM, 16),
        (SCHEME_KMEANS, 2),
        (SCHEME_KMEANS, 4),
        (SCHEME_KMEANS, 32),
    ])
    def test_round_trip(self, scheme, bits):
        p = FixtureHelper.random_params(seed=bits, sizes=(('a', 97), ('b', 3), ('c', 1)))
        q = quantize_params(p, bits, scheme)
        self.assertEqual(deserialize_payload(serialize_payload(q)), q)

    def test_short_kmeans_codebook_round_trip(self):
        p = FixtureHelper.random_params(sizes=(('a', 3),))
        q = quantize_params(p, 4, SCHEME_KMEANS)
        self.assertEqual(len(q.layers[0].codec.centroids), 3)
        self.assertEqual(deserialize_payload(serialize_payload(q)), q)

    def test_pack_is_lsb_first(self):
        self.assertEqual(pack_indices([1, 2, 3], 2), bytes([0b00111001]))
        np.testing.assert_array_equal(unpack_indices(bytes([0b00111001]), 3, 2), [1, 2, 3])

    def test_weight_bytes(self):
        p = FixtureHelper.random_params(sizes=(('w', 1000),))
        self.assertEqual(payload_size(quantize_params(p, 4, SCHEME_UNIFORM)), (500, 8))

    @parameterized.expand([(1,), (8,), (16,)])
    def test_uniform_aux_is_two_floats(self, bits):
        p = FixtureHelper.random_params(sizes=(('a', 10), ('b', 20), ('c', 5)))
        self.assertEqual(payload_size(quantize_params(p, bits, SCHEME_UNIFORM))[1], 3 * 8)

    def test_kmeans_aux_is_full_codebook(self):
        p = FixtureHelper.random_params(sizes=(('a', 600), ('b', 300)))
        self.assertEqual(payload_size(quantize_params(p, 8, SCHEME_KMEANS))[1], 2 * 256 * 4)

    def test_sizes_add_up_to_serialized_length(self):
        q = quantize_params(_reference_model(), 4, SCHEME_KMEANS)
        self.assertEqual(sum(payload_size(q)) + overhead_size(q), len(serialize_payload(q)))

    @parameterized.expand([
        (4, 7.0),
        (8, 3.5),
    ])
    def test_compression_ratio(self, bits, factor):
        p = _reference_model()
        quantized = sum(payload_size(quantize_params(p, bits, SCHEME_UNIFORM)))
        full = full_precision_size(p.num_params)
        self.assertEqual(sum(payload_size(quantize_params(p, 32, SCHEME_UNIFORM))), full)
        self.assertLessEqual(quantized, full / factor)

    def test_transfer_efficiency(self):
        self.assertAlmostEqual(transfer_efficiency(100, 800, 0.0, 100.0), 8.0)
        self.assertLess(transfer_efficiency(100, 800, 10.0, 100.0), 1.0)


class TestCorruptPayload(unittest.TestCase):
    def setUp(self):
        p = FixtureHelper.random_params(sizes=(('a', 40),))
        self.data = serialize_payload(quantize_params(p, 4, SCHEME_UNIFORM))

    def assertCorrupt(self, data, offset=None):
        with self.assertRaises(CorruptionError) as ctx:
            deserialize_payload(data)
        if offset is not None:
            self.assertEqual(ctx.exception.offset, offset)

    def test_bad_magic(self):
        self.assertCorrupt(b'XXXX' + self.data[4:], offset=0)

    def test_bad_version(self):
        self.assertCorrupt(self.data[:4] + struct.pack('<H', 9) + self.data[6:], offset=4)

    def test_bad_scheme(self):
        self.assertCorrupt(self.data[:6] + bytes([7]) + self.data[7:], offset=6)

    def test_bad_bits(self):
        self.assertCorrupt(self.data[:7] + bytes([40]) + self.data[8:], offset=7)

    @parameterized.expand([(3,), (12,), (20,), (-1,)])
    def test_truncated(self, cut):
        self.assertCorrupt(self.data[:cut])

    def test_trailing_bytes(self):
        self.assertCorrupt(self.data + b'\x00')

    def test_index_out_of_range(self):
        codebook_q = quantize_params(FixtureHelper.random_params(sizes=(('a', 3),)), 2, SCHEME_KMEANS)
        data = bytearray(serialize_payload(codebook_q))
        # three distinct centroids padded to four; index 3 points past them
        data[-1] = 0b00111111
        self.assertCorrupt(bytes(data))

    def test_magic_constant(self):
        self.assertEqual(self.data[:4], MAGIC)


class TestPayloadFiles(unittest.TestCase):
    def test_write_and_read(self):
        q = quantize_params(FixtureHelper.random_params(), 3, SCHEME_KMEANS)
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'upload.fsq')
            write_payload(path, q)
            self.assertEqual(read_payload(path), q)

    def test_missing_file(self):
        with tempfile.TemporaryDirectory() as directory:
            self.assertRaises(OutputError, read_payload, os.path.join(directory, 'missing.fsq'))

    def test_unwritable_path(self):
        q = quantize_params(FixtureHelper.random_params(), 3, SCHEME_UNIFORM)
        with tempfile.TemporaryDirectory() as directory:
            self.assertRaises(OutputError, write_payload, os.path.join(directory, 'no', 'such', 'x.fsq'), q)
