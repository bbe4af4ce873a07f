from typing import Callable, Iterator, Tuple

import attr
import numpy as np

from fedshift.exceptions import ConfigurationError


def _to_layers(layers):
    converted = []
    seen = set()
    for name, values in layers:
        if name in seen:
            raise ConfigurationError(f'duplicate layer name: {name}')
        seen.add(name)
        array = np.asarray(values)
        if array.dtype.kind != 'f':
            array = array.astype(np.float32)
        converted.append((str(name), array.reshape(-1)))
    return tuple(converted)


@attr.define(kw_only=True, frozen=True, eq=False)
class LayeredParams:
    """
    Ordered, named flat tensors

    Float32 is the storage precision of model parameters. Aggregates and shifted models are
    kept in float64 until the server stores them back as the next global model.
    """
    layers: Tuple[Tuple[str, np.ndarray], ...] = attr.ib(converter=_to_layers)

    @classmethod
    def from_arrays(cls, names, arrays):
        return LayeredParams(layers=list(zip(names, arrays)))

    @property
    def names(self):
        return [name for name, _ in self.layers]

    @property
    def sizes(self):
        return [values.size for _, values in self.layers]

    @property
    def num_params(self):
        return int(sum(self.sizes))

    @property
    def dtype(self):
        return self.layers[0][1].dtype

    def __iter__(self) -> Iterator[Tuple[str, np.ndarray]]:
        return iter(self.layers)

    def __len__(self):
        return len(self.layers)

    def __eq__(self, other):
        """Bitwise equality of layout and values"""
        if not isinstance(other, LayeredParams):
            return NotImplemented
        if self.names != other.names:
            return False
        return all(a.dtype == b.dtype and np.array_equal(a, b) for (_, a), (_, b) in zip(self.layers, other.layers))

    def values(self, name):
        for layer_name, values in self.layers:
            if layer_name == name:
                return values
        raise ConfigurationError(f'layer not found: {name}')

    def same_layout(self, other):
        return self.names == other.names and self.sizes == other.sizes

    def check_layout(self, other):
        if not self.same_layout(other):
            raise ConfigurationError(f'layout mismatch: {list(zip(self.names, self.sizes))} '
                                     f'vs {list(zip(other.names, other.sizes))}')

    def map(self, fn: Callable[[np.ndarray], np.ndarray]):
        return LayeredParams(layers=[(name, fn(values)) for name, values in self.layers])

    def zip_map(self, other, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]):
        self.check_layout(other)
        return LayeredParams(layers=[(name, fn(a, b)) for (name, a), (_, b) in zip(self.layers, other.layers)])

    def astype(self, dtype):
        return self.map(lambda v: v.astype(dtype))

    def copy(self):
        return self.map(np.copy)

    def zeros_like(self):
        return self.map(np.zeros_like)

    def flatten(self, dtype=np.float64):
        return np.concatenate([values.astype(dtype) for _, values in self.layers])

    def as_single_layer(self, name='all'):
        """The whole parameter vector as one layer; used for global-scope shifting"""
        return LayeredParams(layers=[(name, self.flatten(self.dtype))])

    def unflatten(self, flat):
        """Split a flat vector back into this layout"""
        flat = np.asarray(flat)
        if flat.size != self.num_params:
            raise ConfigurationError(f'expected {self.num_params} values, received {flat.size}')
        bounds = np.cumsum([0] + self.sizes)
        return LayeredParams(layers=[(name, flat[lo:hi]) for name, lo, hi in zip(self.names, bounds[:-1], bounds[1:])])

    def is_finite(self):
        return all(np.all(np.isfinite(values)) for _, values in self.layers)


def layer_mean(p: LayeredParams, layer: str) -> float:
    """
    Arithmetic mean of one layer, accumulated in float64

    :param p: LayeredParams
    :param layer: str
    :return: float
    """
    values = p.values(layer)
    if values.size == 0:
        return 0.0
    return float(np.sum(values, dtype=np.float64) / values.size)


def layer_means(p: LayeredParams) -> dict:
    return {name: layer_mean(p, name) for name in p.names}
