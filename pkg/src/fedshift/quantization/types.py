from typing import Tuple, Union

import attr
import numpy as np

from fedshift.exceptions import ConfigurationError

SCHEME_UNIFORM = 'uniform'
SCHEME_KMEANS = 'kmeans'
SCHEME_RAW = 'raw'
SCHEMES = [SCHEME_UNIFORM, SCHEME_KMEANS]

MIN_BITS = 1
MAX_BITS = 16
FULL_PRECISION_BITS = 32


def check_bits(bits):
    if not MIN_BITS <= int(bits) <= MAX_BITS:
        raise ConfigurationError(f'bits must lie in [{MIN_BITS}, {MAX_BITS}], received {bits}')
    return int(bits)


def _f32(value):
    return float(np.float32(value))


def _centroids(value):
    return tuple(_f32(c) for c in value)


@attr.define(kw_only=True, frozen=True)
class UniformCodec:
    w_min: float = attr.ib(converter=_f32)
    w_max: float = attr.ib(converter=_f32)
    bits: int = attr.ib(converter=check_bits)

    @w_max.validator
    def _check_range(self, attribute, value):
        if self.w_min > value:
            raise ConfigurationError(f'w_min {self.w_min} exceeds w_max {value}')

    @property
    def levels(self):
        return 2 ** self.bits


@attr.define(kw_only=True, frozen=True)
class KMeansCodebook:
    centroids: Tuple[float, ...] = attr.ib(converter=_centroids)
    bits: int = attr.ib(converter=check_bits)

    @centroids.validator
    def _check_centroids(self, attribute, value):
        if not value:
            raise ConfigurationError('codebook is empty')
        if len(value) > 2 ** self.bits:
            raise ConfigurationError(f'{len(value)} centroids exceed 2^{self.bits}')
        if any(b <= a for a, b in zip(value[:-1], value[1:])):
            raise ConfigurationError('centroids must be strictly increasing')

    @property
    def array(self):
        return np.asarray(self.centroids, dtype=np.float32)


def _indices(value):
    return np.asarray(value, dtype=np.uint32).reshape(-1)


@attr.define(kw_only=True, frozen=True, eq=False)
class QuantizedLayer:
    """
    One quantized tensor. ``codec`` is None for the raw full-precision scheme, whose indices
    are the float32 bit patterns of the values.
    """
    name: str = attr.ib()
    indices: np.ndarray = attr.ib(converter=_indices)
    codec: Union[UniformCodec, KMeansCodebook, None] = attr.ib(default=None)

    @property
    def scheme(self):
        if isinstance(self.codec, UniformCodec):
            return SCHEME_UNIFORM
        if isinstance(self.codec, KMeansCodebook):
            return SCHEME_KMEANS
        return SCHEME_RAW

    @property
    def bits(self):
        return FULL_PRECISION_BITS if self.codec is None else self.codec.bits

    @property
    def size(self):
        return int(self.indices.size)

    def __eq__(self, other):
        if not isinstance(other, QuantizedLayer):
            return NotImplemented
        return (self.name == other.name and self.codec == other.codec
                and np.array_equal(self.indices, other.indices))


@attr.define(kw_only=True, frozen=True, eq=False)
class QuantizedModel:
    layers: Tuple[QuantizedLayer, ...] = attr.ib(converter=tuple)
    scheme: str = attr.ib()
    bits: int = attr.ib()

    @scheme.validator
    def _check_scheme(self, attribute, value):
        if value not in SCHEMES + [SCHEME_RAW]:
            raise ConfigurationError(f'scheme must be one of {", ".join(SCHEMES)}, received {value}')
        for layer in self.layers:
            if layer.scheme != value:
                raise ConfigurationError(f'layer {layer.name} uses scheme {layer.scheme}, model uses {value}')

    @property
    def names(self):
        return [layer.name for layer in self.layers]

    @property
    def num_params(self):
        return int(sum(layer.size for layer in self.layers))

    def __eq__(self, other):
        if not isinstance(other, QuantizedModel):
            return NotImplemented
        return (self.scheme == other.scheme and self.bits == other.bits
                and len(self.layers) == len(other.layers)
                and all(a == b for a, b in zip(self.layers, other.layers)))
