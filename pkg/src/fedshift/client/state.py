from typing import Optional, Union

import attr

from fedshift.exceptions import ConfigurationError
from fedshift.model.dataset import Dataset
from fedshift.model.params import LayeredParams
from fedshift.partition.plan import GROUP_INFERIOR, GROUPS
from fedshift.quantization.kmeans import DEFAULT_MAX_ITERS, DEFAULT_TOL
from fedshift.quantization.types import FULL_PRECISION_BITS, MAX_BITS, MIN_BITS, SCHEME_KMEANS, SCHEMES, QuantizedModel

ALGORITHM_FEDAVG = 'fedavg'
ALGORITHM_FEDPROX = 'fedprox'
ALGORITHM_SCAFFOLD = 'scaffold'
ALGORITHM_FEDEF = 'fedef'
ALGORITHMS = [ALGORITHM_FEDAVG, ALGORITHM_FEDPROX, ALGORITHM_SCAFFOLD, ALGORITHM_FEDEF]

DEFAULT_PROX_MU = 0.01


def _one_of(choices):
    def validate(instance, attribute, value):
        if value not in choices:
            raise ConfigurationError(f'{attribute.name} must be one of {", ".join(map(str, choices))}, '
                                     f'received {value}')
    return validate


@attr.define(kw_only=True, frozen=True)
class LocalConfig:
    algorithm: str = attr.ib(default=ALGORITHM_FEDAVG, validator=_one_of(ALGORITHMS))
    epochs: int = attr.ib(default=1)
    batch_size: int = attr.ib(default=50)
    lr: float = attr.ib(default=0.005)
    momentum: float = attr.ib(default=0.9)
    prox_mu: float = attr.ib(default=DEFAULT_PROX_MU)
    bits: int = attr.ib(default=FULL_PRECISION_BITS)
    scheme: str = attr.ib(default=SCHEME_KMEANS, validator=_one_of(SCHEMES))
    kmeans_max_iters: int = attr.ib(default=DEFAULT_MAX_ITERS)
    kmeans_tol: float = attr.ib(default=DEFAULT_TOL)

    def __attrs_post_init__(self):
        if self.epochs < 1:
            raise ConfigurationError(f'epochs must be >= 1, received {self.epochs}')
        if self.batch_size < 1:
            raise ConfigurationError(f'batch_size must be >= 1, received {self.batch_size}')
        if self.lr <= 0:
            raise ConfigurationError(f'lr must be positive, received {self.lr}')
        if not 0 <= self.momentum < 1:
            raise ConfigurationError(f'momentum must lie in [0, 1), received {self.momentum}')
        if self.prox_mu < 0:
            raise ConfigurationError(f'prox_mu must be non-negative, received {self.prox_mu}')
        if self.bits != FULL_PRECISION_BITS and not MIN_BITS <= self.bits <= MAX_BITS:
            raise ConfigurationError(f'bits must lie in [{MIN_BITS}, {MAX_BITS}] or be {FULL_PRECISION_BITS}, '
                                     f'received {self.bits}')

    @classmethod
    def from_spec(cls, spec):
        return LocalConfig(**spec)


@attr.define(kw_only=True, frozen=True)
class ClientState:
    id: int = attr.ib()
    group: str = attr.ib(validator=_one_of(GROUPS))
    data: Dataset = attr.ib()
    control_variate: Optional[LayeredParams] = attr.ib(default=None)
    error_residual: Optional[LayeredParams] = attr.ib(default=None)
    rng_seed: int = attr.ib(default=0)

    @error_residual.validator
    def _check_residual(self, attribute, value):
        if value is not None and self.group != GROUP_INFERIOR:
            raise ConfigurationError(f'client {self.id}: only inferior clients keep an error residual')

    @property
    def is_inferior(self):
        return self.group == GROUP_INFERIOR

    @property
    def num_samples(self):
        return self.data.num_samples


@attr.define(kw_only=True, frozen=True)
class ClientUpload:
    client_id: int = attr.ib()
    payload: Union[LayeredParams, QuantizedModel] = attr.ib()
    control_delta: Optional[LayeredParams] = attr.ib(default=None)
    num_samples: int = attr.ib(default=0)
    train_loss: float = attr.ib(default=float('nan'))

    @property
    def is_quantized(self):
        return isinstance(self.payload, QuantizedModel)


def check_upload_type(state: ClientState, upload: ClientUpload):
    """Superior clients send full precision, inferior clients send a QuantizedModel"""
    expected = QuantizedModel if state.is_inferior else LayeredParams
    if not isinstance(upload.payload, expected):
        raise ConfigurationError(f'client {state.id} ({state.group}) produced a {type(upload.payload).__name__} '
                                 f'payload, expected {expected.__name__}')


