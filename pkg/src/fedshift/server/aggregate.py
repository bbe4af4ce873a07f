from typing import List, Optional

import attr
import numpy as np

from fedshift.client.state import ClientUpload
from fedshift.exceptions import ConfigurationError, CorruptionError
from fedshift.model.params import LayeredParams, layer_means
from fedshift.quantization.codec import dequantize_model

SCOPE_PER_LAYER = 'per_layer'
SCOPE_GLOBAL = 'global'
SCOPES = [SCOPE_PER_LAYER, SCOPE_GLOBAL]
GLOBAL_GROUP = 'all'

WEIGHTS_UNIFORM = 'uniform'
WEIGHTS_BY_SAMPLES = 'by_samples'
WEIGHTINGS = [WEIGHTS_UNIFORM, WEIGHTS_BY_SAMPLES]


@attr.define(kw_only=True, frozen=True)
class ServerState:
    global_params: LayeredParams = attr.ib()
    round: int = attr.ib(default=0)
    server_control: Optional[LayeredParams] = attr.ib(default=None)
    # drives client selection
    rng_seed: int = attr.ib(default=0)


def dequantize_uploads(uploads: List[ClientUpload]) -> List[LayeredParams]:
    """
    Restore inferior uploads; full-precision uploads pass through untouched

    :param uploads: list of ClientUpload
    :return: list of LayeredParams
    """
    models = []
    for upload in uploads:
        if not upload.is_quantized:
            models.append(upload.payload)
            continue
        try:
            models.append(dequantize_model(upload.payload))
        except CorruptionError as e:
            raise e.add_context(client=upload.client_id)
    return models


def aggregation_weights(uploads: List[ClientUpload], weighting: str):
    if weighting == WEIGHTS_UNIFORM:
        return None
    if weighting == WEIGHTS_BY_SAMPLES:
        return [upload.num_samples for upload in uploads]
    raise ConfigurationError(f'aggregation weights must be one of {", ".join(WEIGHTINGS)}, received {weighting}')


def aggregate_mean(models: List[LayeredParams], weights=None) -> LayeredParams:
    """
    Per-coordinate mean in float64, reduced in list order

    Uniform weights 1/K unless ``weights`` is given, in which case p_k = weights_k / sum(weights).

    :param models: list of LayeredParams
    :param weights: list of float | None
    :return: LayeredParams (float64)
    """
    if not models:
        raise ConfigurationError('cannot aggregate an empty list of models')
    first = models[0]
    for model in models[1:]:
        first.check_layout(model)
    if weights is not None:
        if len(weights) != len(models):
            raise ConfigurationError(f'{len(weights)} weights for {len(models)} models')
        total = float(sum(weights))
        if total <= 0:
            raise ConfigurationError('aggregation weights must sum to a positive value')
    layers = []
    for i, name in enumerate(first.names):
        acc = np.zeros(first.sizes[i], dtype=np.float64)
        for k, model in enumerate(models):
            values = model.layers[i][1].astype(np.float64)
            acc += values if weights is None else values * (weights[k] / total)
        if weights is None:
            acc /= len(models)
        layers.append((name, acc))
    return LayeredParams(layers=layers)


def shift_global(aggregated: LayeredParams, I: int, K: int, scope: str = SCOPE_PER_LAYER):  # noqa: E741
    """
    Subtract (I/K) * m from every element, m being the mean of its layer (or of the whole
    model with the global scope)

    :param aggregated: LayeredParams
    :param I: int, inferior clients selected this round
    :param K: int, clients selected this round
    :param scope: str, per_layer | global
    :return: (LayeredParams, dict of layer (or 'all') -> m)
    """
    if K < 1 or not 0 <= I <= K:
        raise ConfigurationError(f'shift needs 0 <= I <= K and K >= 1, received I={I}, K={K}')
    if scope == SCOPE_GLOBAL:
        single, means = shift_global(aggregated.as_single_layer(GLOBAL_GROUP), I, K)
        return aggregated.unflatten(single.layers[0][1]), means
    if scope != SCOPE_PER_LAYER:
        raise ConfigurationError(f'shift scope must be one of {", ".join(SCOPES)}, received {scope}')
    means = layer_means(aggregated)
    if I == 0:
        return aggregated, means
    ratio = I / K
    shifted = LayeredParams(layers=[(name, values - ratio * means[name]) for name, values in aggregated])
    return shifted, means


def scaffold_server_update(c: LayeredParams, control_deltas: List[LayeredParams], num_clients: int) -> LayeredParams:
    """c' = c + (1/N) * sum(deltas)"""
    if not control_deltas:
        return c
    acc = c.astype(np.float64)
    for delta in control_deltas:
        acc = acc.zip_map(delta, lambda a, d: a + d.astype(np.float64) / num_clients)
    return acc.astype(c.dtype)
