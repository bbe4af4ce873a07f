"""
Range-based asymmetric uniform quantization.

index = round((w - w_min) / (w_max - w_min) * (2^bits - 1)), rounding half away from zero;
value = index * (w_max - w_min) / (2^bits - 1) + w_min.
"""
import numpy as np

from fedshift.exceptions import DataError
from .types import QuantizedLayer, UniformCodec, check_bits


def finite_vector(values):
    array = np.asarray(values).reshape(-1)
    if array.size and not np.all(np.isfinite(array)):
        raise DataError('layer contains non-finite values')
    return array


def quant_uniform(layer_values, bits: int, name: str = '') -> QuantizedLayer:
    bits = check_bits(bits)
    values = finite_vector(layer_values)
    if values.size == 0:
        return QuantizedLayer(name=name, indices=[], codec=UniformCodec(w_min=0.0, w_max=0.0, bits=bits))
    codec = UniformCodec(w_min=values.min(), w_max=values.max(), bits=bits)
    span = codec.w_max - codec.w_min
    if span == 0:
        return QuantizedLayer(name=name, indices=np.zeros(values.size, dtype=np.uint32), codec=codec)
    top = codec.levels - 1
    scaled = (values.astype(np.float64) - codec.w_min) / span * top
    # scaled >= 0, so half-away-from-zero is floor(x + 0.5)
    indices = np.clip(np.floor(scaled + 0.5), 0, top).astype(np.uint32)
    return QuantizedLayer(name=name, indices=indices, codec=codec)


def dequant_uniform(q: QuantizedLayer) -> np.ndarray:
    codec = q.codec
    if codec.w_max == codec.w_min:
        return np.full(q.size, codec.w_min, dtype=np.float32)
    span = codec.w_max - codec.w_min
    values = q.indices.astype(np.float64) * span / (codec.levels - 1) + codec.w_min
    return values.astype(np.float32)


def half_step(codec: UniformCodec) -> float:
    """Worst-case reconstruction error of a uniform codec"""
    return (codec.w_max - codec.w_min) / (2 * (codec.levels - 1))
