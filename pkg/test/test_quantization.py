import unittest

import numpy as np
from parameterized import parameterized

from fedshift.exceptions import ConfigurationError, CorruptionError, DataError
from fedshift.quantization.codec import dequantize_model, quantize_params
from fedshift.quantization.kmeans import dequant_kmeans, kmeans_fit, max_gap, nearest_centroid, quant_kmeans
from fedshift.quantization.types import SCHEME_KMEANS, SCHEME_RAW, SCHEME_UNIFORM, KMeansCodebook, QuantizedLayer
from fedshift.quantization.uniform import dequant_uniform, half_step, quant_uniform
from test.helpers import FixtureHelper


def _mse(a, b):
    return float(np.mean((np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)) ** 2))


class TestUniformCodec(unittest.TestCase):
    def test_half_away_rounding(self):
        q = quant_uniform([-1.0, 0.0, 1.0], 2)
        np.testing.assert_array_equal(q.indices, [0, 2, 3])
        self.assertEqual((q.codec.w_min, q.codec.w_max), (-1.0, 1.0))

    def test_dequant(self):
        q = quant_uniform([-1.0, 0.0, 1.0], 2)
        np.testing.assert_allclose(dequant_uniform(q), [-1.0, 1.0 / 3.0, 1.0], rtol=1e-6)

    @parameterized.expand([(1,), (4,), (8,), (16,)])
    def test_constant_layer(self, bits):
        q = quant_uniform([0.7, 0.7], bits)
        np.testing.assert_array_equal(q.indices, [0, 0])
        self.assertEqual(q.codec.w_min, q.codec.w_max)
        np.testing.assert_array_equal(dequant_uniform(q), np.asarray([0.7, 0.7], dtype=np.float32))

    @parameterized.expand([(1,), (3,), (8,), (16,)])
    def test_endpoints(self, bits):
        values = np.asarray([-0.3, 2.5], dtype=np.float32)
        q = quant_uniform(values, bits)
        np.testing.assert_array_equal(q.indices, [0, 2 ** bits - 1])
        np.testing.assert_array_equal(dequant_uniform(q), values)

    def test_half_step_bound(self):
        rng = np.random.default_rng(0)
        for bits in range(1, 17):
            for _ in range(10):
                values = (rng.normal(size=int(rng.integers(1, 300))) * rng.uniform(0.01, 5)).astype(np.float32)
                q = quant_uniform(values, bits)
                error = np.max(np.abs(dequant_uniform(q).astype(np.float64) - values))
                ulp = float(np.spacing(np.float32(max(abs(q.codec.w_min), abs(q.codec.w_max)))))
                self.assertLessEqual(error, half_step(q.codec) + 2 * ulp)

    @parameterized.expand([(0,), (17,)])
    def test_invalid_bits(self, bits):
        self.assertRaises(ConfigurationError, quant_uniform, [0.0, 1.0], bits)

    def test_non_finite(self):
        self.assertRaises(DataError, quant_uniform, [0.0, np.nan], 4)

    @parameterized.expand([(1,), (4,), (8,)])
    def test_indices_follow_value_order(self, bits):
        values = np.random.default_rng(bits).normal(size=500).astype(np.float32)
        q = quant_uniform(values, bits)
        order = np.argsort(values, kind='stable')
        self.assertTrue(np.all(np.diff(q.indices[order].astype(np.int64)) >= 0))


class TestKMeansCodec(unittest.TestCase):
    def test_two_point_masses(self):
        codebook = kmeans_fit([0, 0, 0, 10, 10, 10], 1)
        self.assertEqual(codebook.centroids, (0.0, 10.0))

    def test_few_distinct_values_are_exact(self):
        values = np.asarray([0.5, -1.25, 0.5, 3.0, -1.25], dtype=np.float32)
        codebook = kmeans_fit(values, 2)
        self.assertEqual(codebook.centroids, (-1.25, 0.5, 3.0))
        np.testing.assert_array_equal(dequant_kmeans(quant_kmeans(values, codebook)), values)

    def test_tie_goes_to_lower_index(self):
        codebook = KMeansCodebook(centroids=[0.0, 10.0], bits=1)
        np.testing.assert_array_equal(quant_kmeans([5.0, 0.0, 10.0], codebook).indices, [0, 0, 1])

    def test_nearest_matches_linear_scan(self):
        rng = np.random.default_rng(4)
        centroids = np.sort(rng.normal(size=9))
        values = rng.normal(size=500) * 2
        brute = np.argmin(np.abs(values[:, None] - centroids[None, :]), axis=1)
        np.testing.assert_array_equal(nearest_centroid(values, centroids), brute)

    def test_dequant(self):
        codebook = KMeansCodebook(centroids=[-2.0, 3.0], bits=1)
        q = QuantizedLayer(name='w', indices=[0, 0, 1], codec=codebook)
        np.testing.assert_array_equal(dequant_kmeans(q), [-2.0, -2.0, 3.0])

    def test_centroids_are_fixed_points(self):
        values = np.random.default_rng(2).normal(size=400).astype(np.float32)
        codebook = kmeans_fit(values, 3)
        np.testing.assert_array_equal(dequant_kmeans(quant_kmeans(codebook.array, codebook)), codebook.array)

    def test_gap_bound(self):
        values = np.random.default_rng(3).standard_t(3, size=1000).astype(np.float32)
        codebook = kmeans_fit(values, 4)
        restored = dequant_kmeans(quant_kmeans(values, codebook)).astype(np.float64)
        inside = (values >= codebook.centroids[0]) & (values <= codebook.centroids[-1])
        error = np.abs(restored - values)[inside]
        self.assertLessEqual(float(error.max()), max_gap(codebook) / 2 + 1e-6)

    def test_codebook_is_sorted_and_bounded(self):
        values = np.random.default_rng(5).normal(size=2000)
        for bits in (1, 2, 4, 6):
            codebook = kmeans_fit(values, bits)
            self.assertLessEqual(len(codebook.centroids), 2 ** bits)
            self.assertTrue(np.all(np.diff(codebook.array) > 0))

    @parameterized.expand([(seed,) for seed in range(5)])
    def test_beats_uniform_at_four_bits(self, seed):
        values = np.random.default_rng(seed).normal(0.0, 0.05, size=4096).astype(np.float32)
        kmeans = dequant_kmeans(quant_kmeans(values, kmeans_fit(values, 4)))
        uniform = dequant_uniform(quant_uniform(values, 4))
        self.assertLess(_mse(kmeans, values), _mse(uniform, values))

    def test_out_of_range_index(self):
        codebook = KMeansCodebook(centroids=[0.0, 1.0], bits=2)
        q = QuantizedLayer(name='w', indices=[0, 3], codec=codebook)
        self.assertRaises(CorruptionError, dequant_kmeans, q)

    def test_unsorted_codebook_rejected(self):
        self.assertRaises(ConfigurationError, KMeansCodebook, centroids=[1.0, 0.0], bits=1)

    def test_empty_layer(self):
        self.assertRaises(DataError, kmeans_fit, [], 2)

    def test_seed_does_not_change_codebook(self):
        values = np.random.default_rng(6).normal(size=20000)
        self.assertEqual(kmeans_fit(values, 4, seed=0), kmeans_fit(values, 4, seed=9))


class TestQuantizeParams(unittest.TestCase):
    @parameterized.expand([
        (SCHEME_UNIFORM, 4),
        (SCHEME_KMEANS, 4),
        (SCHEME_UNIFORM, 8),
    ])
    def test_layers_follow_layout(self, scheme, bits):
        p = FixtureHelper.random_params(seed=1, sizes=(('a', 64), ('b', 8)))
        q = quantize_params(p, bits, scheme)
        self.assertEqual(q.names, p.names)
        self.assertEqual(q.scheme, scheme)
        restored = dequantize_model(q)
        self.assertTrue(restored.same_layout(p))
        self.assertEqual(restored.dtype, np.float32)

    def test_full_precision_sentinel_is_lossless(self):
        p = FixtureHelper.random_params(seed=1)
        q = quantize_params(p, 32, SCHEME_KMEANS)
        self.assertEqual(q.scheme, SCHEME_RAW)
        self.assertEqual(dequantize_model(q), p)

    def test_deterministic(self):
        p = FixtureHelper.random_params(seed=1, sizes=(('a', 300),))
        self.assertEqual(quantize_params(p, 3, SCHEME_KMEANS), quantize_params(p, 3, SCHEME_KMEANS))

    @parameterized.expand([
        (SCHEME_UNIFORM, 2),
        (SCHEME_KMEANS, 4),
        (SCHEME_KMEANS, 32),
    ])
    def test_dequantized_length_matches_input(self, scheme, bits):
        for size in (1, 7, 333):
            p = FixtureHelper.random_params(seed=size, sizes=(('w', size),))
            restored = dequantize_model(quantize_params(p, bits, scheme))
            self.assertEqual(restored.values('w').shape, (size,))
