import unittest

import numpy as np
from parameterized import parameterized

from fedshift.exceptions import ConfigurationError
from fedshift.model.dataset import Dataset
from fedshift.model.network import ModelSpec, init_params, loss_and_grad, predict_logits
from fedshift.model.optim import sgd_step
from fedshift.model.params import LayeredParams, layer_mean, layer_means
from test.helpers import FixtureHelper


class TestLayeredParams(unittest.TestCase):
    def test_layout_follows_model_spec(self):
        spec = ModelSpec(input_dim=3, hidden_dims=[4], num_classes=2)
        p = init_params(spec, 0)
        self.assertEqual(p.names, ['dense0.weight', 'dense0.bias', 'dense1.weight', 'dense1.bias'])
        self.assertEqual(p.sizes, [12, 4, 8, 2])
        self.assertEqual(p.num_params, spec.num_params)
        self.assertEqual(p.dtype, np.float32)

    def test_duplicate_names_rejected(self):
        self.assertRaises(ConfigurationError, LayeredParams, layers=[('a', [1.0]), ('a', [2.0])])

    def test_layout_mismatch(self):
        a = LayeredParams(layers=[('a', [1.0, 2.0])])
        b = LayeredParams(layers=[('a', [1.0])])
        self.assertRaises(ConfigurationError, a.check_layout, b)
        self.assertRaises(ConfigurationError, a.zip_map, b, np.add)

    def test_unknown_layer(self):
        p = LayeredParams(layers=[('a', [1.0])])
        self.assertRaises(ConfigurationError, p.values, 'b')

    def test_flatten_unflatten(self):
        p = FixtureHelper.random_params(seed=3)
        restored = p.unflatten(p.flatten(np.float32))
        self.assertEqual(restored, p)
        self.assertRaises(ConfigurationError, p.unflatten, np.zeros(3))

    def test_single_layer(self):
        p = FixtureHelper.random_params(seed=3)
        single = p.as_single_layer()
        self.assertEqual(single.names, ['all'])
        self.assertEqual(single.num_params, p.num_params)

    def test_equality_is_bitwise(self):
        p = LayeredParams(layers=[('a', np.asarray([0.1], dtype=np.float32))])
        self.assertEqual(p, p.copy())
        self.assertNotEqual(p, p.astype(np.float64))


class TestLayerMean(unittest.TestCase):
    @parameterized.expand([
        ([1.0, 2.0, 3.0], 2.0),
        ([0.0, 0.0, 0.0], 0.0),
        ([-1.0, 1.0], 0.0),
    ])
    def test_layer_mean(self, values, expected):
        p = LayeredParams(layers=[('w', np.asarray(values, dtype=np.float32))])
        self.assertEqual(layer_mean(p, 'w'), expected)

    def test_many_small_values(self):
        p = LayeredParams(layers=[('w', np.full(1000, 0.1, dtype=np.float64))])
        self.assertAlmostEqual(layer_mean(p, 'w'), 0.1, delta=1e-12)

    def test_layer_means(self):
        p = LayeredParams(layers=[('a', [1.0, 3.0]), ('b', [5.0])])
        self.assertEqual(layer_means(p), {'a': 2.0, 'b': 5.0})


class TestInitParams(unittest.TestCase):
    def test_linear_bias_is_zero(self):
        spec = ModelSpec(input_dim=5, hidden_dims=[], num_classes=3)
        p = init_params(spec, 11)
        self.assertEqual(p.names, ['dense0.weight', 'dense0.bias'])
        np.testing.assert_array_equal(p.values('dense0.bias'), np.zeros(3, dtype=np.float32))

    def test_deterministic(self):
        spec = ModelSpec(input_dim=8, hidden_dims=[16], num_classes=4)
        self.assertEqual(init_params(spec, 7), init_params(spec, 7))
        self.assertNotEqual(init_params(spec, 7), init_params(spec, 8))

    def test_kaiming_variance(self):
        spec = ModelSpec(input_dim=8, hidden_dims=[16], num_classes=4)
        pooled = np.concatenate([init_params(spec, seed).values('dense0.weight') for seed in range(10)])
        self.assertAlmostEqual(float(np.var(pooled)), 0.25, delta=0.25 * 0.2)

    def test_zero_width_hidden_layer(self):
        self.assertRaises(ConfigurationError, ModelSpec, input_dim=3, hidden_dims=[0], num_classes=2)


class TestLossAndGrad(unittest.TestCase):
    def test_zero_linear_model_loss_is_log_classes(self):
        spec = ModelSpec(input_dim=4, hidden_dims=[], num_classes=5)
        p = init_params(spec, 0).zeros_like()
        loss, _ = loss_and_grad(p, spec, FixtureHelper.small_dataset(num_classes=5))
        self.assertAlmostEqual(loss, np.log(5), places=12)

    @parameterized.expand([
        ('linear', ()),
        ('mlp', (6,)),
    ])
    def test_matches_finite_differences(self, _, hidden_dims):
        spec = FixtureHelper.small_spec(hidden_dims=hidden_dims)
        p = init_params(spec, 1).astype(np.float64)
        batch = FixtureHelper.small_dataset(seed=2)
        _, grad = loss_and_grad(p, spec, batch)
        flat = p.flatten()
        analytic = grad.flatten()
        h = 1e-4
        for i in range(flat.size):
            up, down = flat.copy(), flat.copy()
            up[i] += h
            down[i] -= h
            numeric = (loss_and_grad(p.unflatten(up), spec, batch)[0]
                       - loss_and_grad(p.unflatten(down), spec, batch)[0]) / (2 * h)
            self.assertLessEqual(abs(numeric - analytic[i]), 1e-4 * max(1.0, abs(numeric)), msg=f'component {i}')

    def test_saturated_logit_has_zero_loss(self):
        spec = ModelSpec(input_dim=2, hidden_dims=[], num_classes=2)
        weight = np.asarray([[1000.0, -1000.0], [0.0, 0.0]])
        p = LayeredParams(layers=[('dense0.weight', weight.reshape(-1)), ('dense0.bias', [0.0, 0.0])])
        batch = Dataset(features=[[1.0, 0.0]], labels=[0])
        loss, _ = loss_and_grad(p, spec, batch)
        self.assertAlmostEqual(loss, 0.0, places=12)

    def test_gradient_keeps_storage_precision(self):
        spec = FixtureHelper.small_spec()
        _, grad = loss_and_grad(init_params(spec, 0), spec, FixtureHelper.small_dataset())
        self.assertEqual(grad.dtype, np.float32)

    def test_wrong_feature_count(self):
        spec = FixtureHelper.small_spec(input_dim=3)
        self.assertRaises(ConfigurationError, loss_and_grad, init_params(spec, 0), spec,
                          FixtureHelper.small_dataset(input_dim=4))

    def test_predict_shape(self):
        spec = FixtureHelper.small_spec()
        data = FixtureHelper.small_dataset()
        self.assertEqual(predict_logits(init_params(spec, 0), spec, data.features).shape, (12, 3))


class TestSgdStep(unittest.TestCase):
    def test_momentum_update(self):
        p = LayeredParams(layers=[('w', np.asarray([1.0]))])
        grad = LayeredParams(layers=[('w', np.asarray([2.0]))])
        velocity = LayeredParams(layers=[('w', np.asarray([1.0]))])
        new_p, new_v = sgd_step(p, grad, velocity, lr=0.1, momentum=0.9)
        self.assertAlmostEqual(float(new_v.values('w')[0]), 2.9, places=12)
        self.assertAlmostEqual(float(new_p.values('w')[0]), 0.71, places=12)

    def test_plain_sgd_without_momentum(self):
        p = FixtureHelper.random_params(seed=1)
        grad = FixtureHelper.random_params(seed=2)
        new_p, _ = sgd_step(p, grad, p.zeros_like(), lr=0.05, momentum=0.0)
        expected = p.zip_map(grad, lambda w, g: w - 0.05 * g)
        self.assertEqual(new_p, expected)

    def test_zero_gradient_is_fixed_point(self):
        p = FixtureHelper.random_params(seed=1)
        new_p, _ = sgd_step(p, p.zeros_like(), p.zeros_like(), lr=0.1, momentum=0.9)
        self.assertEqual(new_p, p)

    @parameterized.expand([
        (0.0, 0.9),
        (-0.1, 0.9),
        (0.1, 1.0),
        (0.1, -0.1),
    ])
    def test_invalid_hyperparameters(self, lr, momentum):
        p = FixtureHelper.random_params()
        self.assertRaises(ConfigurationError, sgd_step, p, p, p, lr, momentum)
