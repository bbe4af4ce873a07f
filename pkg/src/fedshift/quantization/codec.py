import numpy as np

from fedshift.exceptions import ConfigurationError
from fedshift.model.params import LayeredParams

from .kmeans import DEFAULT_MAX_ITERS, DEFAULT_TOL, dequant_kmeans, kmeans_fit, quant_kmeans
from .types import (FULL_PRECISION_BITS, SCHEME_KMEANS, SCHEME_RAW, SCHEME_UNIFORM, SCHEMES, QuantizedLayer,
                    QuantizedModel)
from .uniform import dequant_uniform, finite_vector, quant_uniform


def quant_raw(layer_values, name: str = '') -> QuantizedLayer:
    values = finite_vector(layer_values).astype(np.float32)
    return QuantizedLayer(name=name, indices=values.view(np.uint32), codec=None)


def dequant_raw(q: QuantizedLayer) -> np.ndarray:
    return q.indices.astype(np.uint32).view(np.float32).copy()


def quantize_layer(name, values, bits, scheme, *, max_iters=DEFAULT_MAX_ITERS, tol=DEFAULT_TOL):
    if bits == FULL_PRECISION_BITS:
        return quant_raw(values, name=name)
    if scheme == SCHEME_UNIFORM:
        return quant_uniform(values, bits, name=name)
    if scheme == SCHEME_KMEANS:
        codebook = kmeans_fit(values, bits, max_iters=max_iters, tol=tol)
        return quant_kmeans(values, codebook, name=name)
    raise ConfigurationError(f'scheme must be one of {", ".join(SCHEMES)}, received {scheme}')


def quantize_params(p: LayeredParams, bits: int, scheme: str, *, max_iters=DEFAULT_MAX_ITERS,
                    tol=DEFAULT_TOL) -> QuantizedModel:
    """
    Quantize every layer independently

    ``bits == 32`` is the full-precision sentinel and yields the raw scheme.

    :param p: LayeredParams
    :param bits: int, in [1, 16] or 32
    :param scheme: str, uniform | kmeans
    :return: QuantizedModel
    """
    layers = [quantize_layer(name, values, bits, scheme, max_iters=max_iters, tol=tol) for name, values in p]
    model_scheme = SCHEME_RAW if bits == FULL_PRECISION_BITS else scheme
    return QuantizedModel(layers=layers, scheme=model_scheme, bits=bits)


def dequantize_layer(q: QuantizedLayer) -> np.ndarray:
    if q.scheme == SCHEME_UNIFORM:
        return dequant_uniform(q)
    if q.scheme == SCHEME_KMEANS:
        return dequant_kmeans(q)
    return dequant_raw(q)


def dequantize_model(q: QuantizedModel) -> LayeredParams:
    return LayeredParams(layers=[(layer.name, dequantize_layer(layer)) for layer in q.layers])
