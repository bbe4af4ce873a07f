"""
Small differentiable models: linear softmax regression and ReLU MLPs.

Layer ``dense{i}.weight`` is an (fan_in, fan_out) matrix stored row-major and flattened;
``dense{i}.bias`` is its bias vector. The forward/backward passes run in float64 and
gradients are returned in the dtype of the parameters.
"""
from typing import List, Tuple

import attr
import numpy as np

from fedshift.exceptions import ConfigurationError
from .dataset import Dataset
from .params import LayeredParams

ACTIVATION_RELU = 'relu'
ACTIVATIONS = [ACTIVATION_RELU]


def _positive(instance, attribute, value):
    if int(value) < 1:
        raise ConfigurationError(f'{attribute.name} must be positive, received {value}')


def _hidden(instance, attribute, value):
    for width in value:
        if int(width) < 1:
            raise ConfigurationError(f'hidden layer widths must be >= 1, received {list(value)}')


@attr.define(kw_only=True, frozen=True)
class ModelSpec:
    input_dim: int = attr.ib(validator=_positive)
    hidden_dims: Tuple[int, ...] = attr.ib(converter=tuple, factory=tuple, validator=_hidden)
    num_classes: int = attr.ib(validator=_positive)
    activation: str = attr.ib(default=ACTIVATION_RELU)

    @activation.validator
    def _check_activation(self, attribute, value):
        if value not in ACTIVATIONS:
            raise ConfigurationError(f'activation must be one of {", ".join(ACTIVATIONS)}, received {value}')

    @property
    def dims(self):
        return [self.input_dim] + list(self.hidden_dims) + [self.num_classes]

    def layer_shapes(self) -> List[Tuple[str, tuple]]:
        shapes = []
        dims = self.dims
        for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
            shapes.append((f'dense{i}.weight', (fan_in, fan_out)))
            shapes.append((f'dense{i}.bias', (fan_out,)))
        return shapes

    @property
    def num_params(self):
        return int(sum(np.prod(shape) for _, shape in self.layer_shapes()))


def init_params(spec: ModelSpec, seed: int) -> LayeredParams:
    """
    Kaiming-normal weights (variance 2/fan_in), zero biases, float32

    :param spec: ModelSpec
    :param seed: int
    :return: LayeredParams
    """
    rng = np.random.default_rng(seed)
    layers = []
    for name, shape in spec.layer_shapes():
        if len(shape) == 2:
            std = np.sqrt(2.0 / shape[0])
            values = rng.normal(0.0, std, size=shape).astype(np.float32)
        else:
            values = np.zeros(shape, dtype=np.float32)
        layers.append((name, values))
    return LayeredParams(layers=layers)


def _unpack(p: LayeredParams, spec: ModelSpec):
    shapes = spec.layer_shapes()
    if p.names != [name for name, _ in shapes] or p.sizes != [int(np.prod(shape)) for _, shape in shapes]:
        raise ConfigurationError(f'parameters do not match model spec {spec}')
    arrays = [values.astype(np.float64).reshape(shape) for (_, values), (_, shape) in zip(p, shapes)]
    return list(zip(arrays[0::2], arrays[1::2]))


def _check_batch(batch: Dataset, spec: ModelSpec):
    if batch.num_samples == 0:
        raise ConfigurationError('batch is empty')
    if batch.input_dim != spec.input_dim:
        raise ConfigurationError(f'batch has {batch.input_dim} features, model expects {spec.input_dim}')
    if batch.labels.min() < 0 or batch.labels.max() >= spec.num_classes:
        raise ConfigurationError(f'labels must lie in [0, {spec.num_classes})')


def _forward(dense, features):
    activations = [features]
    pre_activations = []
    h = features
    for weight, bias in dense[:-1]:
        z = h @ weight + bias
        pre_activations.append(z)
        h = np.maximum(z, 0.0)
        activations.append(h)
    weight, bias = dense[-1]
    return h @ weight + bias, activations, pre_activations


def _log_softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    with np.errstate(over='ignore', invalid='ignore'):
        return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def predict_logits(p: LayeredParams, spec: ModelSpec, features) -> np.ndarray:
    dense = _unpack(p, spec)
    logits, _, _ = _forward(dense, np.asarray(features, dtype=np.float64))
    return logits


def loss_and_grad(p: LayeredParams, spec: ModelSpec, batch: Dataset):
    """
    Mean softmax cross-entropy over the batch and its gradient

    :param p: LayeredParams
    :param spec: ModelSpec
    :param batch: Dataset
    :return: (float, LayeredParams)
    """
    _check_batch(batch, spec)
    dense = _unpack(p, spec)
    n = batch.num_samples
    rows = np.arange(n)

    logits, activations, pre_activations = _forward(dense, batch.features)
    log_probs = _log_softmax(logits)
    loss = float(-log_probs[rows, batch.labels].mean())

    delta = np.exp(log_probs)
    delta[rows, batch.labels] -= 1.0
    delta /= n

    grads = []
    for i in reversed(range(len(dense))):
        weight, _ = dense[i]
        grads.append((activations[i].T @ delta, delta.sum(axis=0)))
        if i > 0:
            delta = (delta @ weight.T) * (pre_activations[i - 1] > 0.0)
    grads.reverse()

    dtype = p.dtype
    flat = []
    for grad_weight, grad_bias in grads:
        flat.append(grad_weight.reshape(-1).astype(dtype))
        flat.append(grad_bias.astype(dtype))
    return loss, LayeredParams.from_arrays(p.names, flat)
