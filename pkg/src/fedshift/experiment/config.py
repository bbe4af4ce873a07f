import copy
import itertools
from typing import List, Optional, Tuple

import attr
import yaml
from marshmallow import RAISE, Schema, ValidationError, fields, validate, validates_schema

from fedshift.client.state import ALGORITHM_FEDAVG, ALGORITHMS, DEFAULT_PROX_MU, LocalConfig
from fedshift.common.logger import get_logger
from fedshift.exceptions import ConfigurationError, OutputError
from fedshift.model.network import ACTIVATION_RELU, ACTIVATIONS
from fedshift.partition.plan import DEFAULT_LABELS_PER_CLIENT
from fedshift.quantization.kmeans import DEFAULT_MAX_ITERS, DEFAULT_TOL
from fedshift.quantization.types import FULL_PRECISION_BITS, MAX_BITS, MIN_BITS, SCHEME_KMEANS, SCHEMES
from fedshift.server.aggregate import SCOPE_PER_LAYER, SCOPES, WEIGHTINGS, WEIGHTS_UNIFORM

logger = get_logger(__name__)

PARTITION_SHARD = 'shard'
PARTITION_DIRICHLET = 'dirichlet'
PARTITIONS = [PARTITION_SHARD, PARTITION_DIRICHLET]

DEFAULT_VARIANT = 'default'
SWEEP_KEY = 'sweep'

_positive = validate.Range(min=1)
_non_negative = validate.Range(min=0)


class StrictSchema(Schema):
    class Meta:
        ordered = True
        unknown = RAISE


class ModelSchema(StrictSchema):
    hidden_dims = fields.List(fields.Int(validate=_positive), load_default=list)
    activation = fields.Str(load_default=ACTIVATION_RELU, validate=validate.OneOf(ACTIVATIONS))


class SyntheticSchema(StrictSchema):
    num_classes = fields.Int(required=True, validate=validate.Range(min=2))
    samples_per_class = fields.Int(required=True, validate=_positive)
    test_samples_per_class = fields.Int(load_default=100, validate=_positive)
    input_dim = fields.Int(required=True, validate=_positive)
    class_separation = fields.Float(required=True, validate=_non_negative)


class CsvSchema(StrictSchema):
    path = fields.Str(required=True)
    label_column = fields.Str(load_default='label')
    test_fraction = fields.Float(load_default=0.2, validate=validate.Range(min=0, max=1, max_inclusive=False))


class DatasetSchema(StrictSchema):
    synthetic = fields.Nested(SyntheticSchema, load_default=None)
    csv = fields.Nested(CsvSchema, load_default=None)

    @validates_schema
    def _exactly_one(self, data, **kwargs):
        if (data.get('synthetic') is None) == (data.get('csv') is None):
            raise ValidationError('exactly one of synthetic, csv is required', field_name='synthetic')


class PartitionSchema(StrictSchema):
    scheme = fields.Str(required=True, validate=validate.OneOf(PARTITIONS))
    labels_per_client = fields.Int(load_default=DEFAULT_LABELS_PER_CLIENT, validate=_positive)
    alpha = fields.Float(load_default=0.5, validate=validate.Range(min=0, min_inclusive=False))
    inferior_fraction = fields.Float(load_default=0.5, validate=validate.Range(min=0, max=1))


class FederationSchema(StrictSchema):
    num_clients = fields.Int(required=True, validate=validate.Range(min=2))
    participation = fields.Float(required=True, validate=validate.Range(min=0, max=1, min_inclusive=False))
    rounds = fields.Int(required=True, validate=_positive)
    parallelism = fields.Int(load_default=1, validate=_positive)


class LocalSchema(StrictSchema):
    algorithm = fields.Str(load_default=ALGORITHM_FEDAVG, validate=validate.OneOf(ALGORITHMS))
    epochs = fields.Int(required=True, validate=_positive)
    batch_size = fields.Int(required=True, validate=_positive)
    lr = fields.Float(required=True, validate=validate.Range(min=0, min_inclusive=False))
    momentum = fields.Float(load_default=0.9, validate=validate.Range(min=0, max=1, max_inclusive=False))
    prox_mu = fields.Float(load_default=DEFAULT_PROX_MU, validate=_non_negative)
    bits = fields.Int(load_default=FULL_PRECISION_BITS,
                      validate=validate.OneOf(list(range(MIN_BITS, MAX_BITS + 1)) + [FULL_PRECISION_BITS]))
    scheme = fields.Str(load_default=SCHEME_KMEANS, validate=validate.OneOf(SCHEMES))
    kmeans_max_iters = fields.Int(load_default=DEFAULT_MAX_ITERS, validate=_positive)
    kmeans_tol = fields.Float(load_default=DEFAULT_TOL, validate=_non_negative)


class AggregationSchema(StrictSchema):
    shift_enabled = fields.Bool(load_default=True)
    shift_scope = fields.Str(load_default=SCOPE_PER_LAYER, validate=validate.OneOf(SCOPES))
    weights = fields.Str(load_default=WEIGHTS_UNIFORM, validate=validate.OneOf(WEIGHTINGS))


class ExperimentSchema(StrictSchema):
    name = fields.Str(load_default='experiment')
    model = fields.Nested(ModelSchema, load_default=dict)
    dataset = fields.Nested(DatasetSchema, required=True)
    partition = fields.Nested(PartitionSchema, required=True)
    federation = fields.Nested(FederationSchema, required=True)
    local = fields.Nested(LocalSchema, required=True)
    aggregation = fields.Nested(AggregationSchema, load_default=dict)
    seeds = fields.List(fields.Int(), required=True, validate=validate.Length(min=1))
    output_dir = fields.Str(load_default='runs')
    dump_payloads = fields.Bool(load_default=False)


@attr.define(kw_only=True, frozen=True)
class ModelConfig:
    hidden_dims: Tuple[int, ...] = attr.ib(converter=tuple, factory=tuple)
    activation: str = attr.ib(default=ACTIVATION_RELU)


@attr.define(kw_only=True, frozen=True)
class SyntheticConfig:
    num_classes: int = attr.ib()
    samples_per_class: int = attr.ib()
    test_samples_per_class: int = attr.ib()
    input_dim: int = attr.ib()
    class_separation: float = attr.ib()


@attr.define(kw_only=True, frozen=True)
class CsvConfig:
    path: str = attr.ib()
    label_column: str = attr.ib()
    test_fraction: float = attr.ib()


@attr.define(kw_only=True, frozen=True)
class PartitionConfig:
    scheme: str = attr.ib()
    labels_per_client: int = attr.ib(default=DEFAULT_LABELS_PER_CLIENT)
    alpha: float = attr.ib(default=0.5)
    inferior_fraction: float = attr.ib(default=0.5)


@attr.define(kw_only=True, frozen=True)
class FederationConfig:
    num_clients: int = attr.ib()
    participation: float = attr.ib()
    rounds: int = attr.ib()
    parallelism: int = attr.ib(default=1)


@attr.define(kw_only=True, frozen=True)
class AggregationConfig:
    shift_enabled: bool = attr.ib(default=True)
    shift_scope: str = attr.ib(default=SCOPE_PER_LAYER)
    weights: str = attr.ib(default=WEIGHTS_UNIFORM)


@attr.define(kw_only=True, frozen=True)
class ExperimentConfig:
    name: str = attr.ib()
    model: ModelConfig = attr.ib()
    synthetic: Optional[SyntheticConfig] = attr.ib()
    csv: Optional[CsvConfig] = attr.ib()
    partition: PartitionConfig = attr.ib()
    federation: FederationConfig = attr.ib()
    local: LocalConfig = attr.ib()
    aggregation: AggregationConfig = attr.ib()
    seeds: Tuple[int, ...] = attr.ib(converter=tuple)
    output_dir: str = attr.ib()
    dump_payloads: bool = attr.ib(default=False)

    @federation.validator
    def _check_clients(self, attribute, value):
        if self.partition.scheme == PARTITION_SHARD and value.num_clients % 2:
            raise ConfigurationError(f'federation.num_clients must be even for the shard partition, '
                                     f'received {value.num_clients}')

    @classmethod
    def from_spec(cls, spec):
        dataset = spec['dataset']
        synthetic = dataset.get('synthetic')
        csv = dataset.get('csv')
        return ExperimentConfig(
            name=spec['name'],
            model=ModelConfig(**spec['model']),
            synthetic=None if synthetic is None else SyntheticConfig(**synthetic),
            csv=None if csv is None else CsvConfig(**csv),
            partition=PartitionConfig(**spec['partition']),
            federation=FederationConfig(**spec['federation']),
            local=LocalConfig.from_spec(spec['local']),
            aggregation=AggregationConfig(**spec['aggregation']),
            seeds=spec['seeds'],
            output_dir=spec['output_dir'],
            dump_payloads=spec['dump_payloads'],
        )


def _flatten_messages(messages, prefix=''):
    if isinstance(messages, dict):
        for key, value in messages.items():
            path = f'{prefix}.{key}' if prefix else str(key)
            yield from _flatten_messages(value, path)
    elif isinstance(messages, list) and messages and all(isinstance(m, str) for m in messages):
        yield prefix, ' '.join(messages)
    elif isinstance(messages, list):
        for i, value in enumerate(messages):
            yield from _flatten_messages(value, f'{prefix}[{i}]')
    else:
        yield prefix, str(messages)


def validate_spec(raw: dict) -> ExperimentConfig:
    """
    Validate a raw config mapping and build an ExperimentConfig

    :raises ConfigurationError: naming every offending dotted key
    """
    if not isinstance(raw, dict):
        raise ConfigurationError('config must be a mapping')
    try:
        spec = ExperimentSchema().load(raw)
    except ValidationError as e:
        problems = '; '.join(f'{key}: {message}' for key, message in _flatten_messages(e.messages))
        raise ConfigurationError(f'invalid config: {problems}')
    return ExperimentConfig.from_spec(spec)


def read_yaml(path):
    try:
        with open(path, 'r') as stream:
            raw = yaml.safe_load(stream)
    except OSError as e:
        raise OutputError(f'cannot read config: {e}', path=str(path))
    except yaml.YAMLError as e:
        raise ConfigurationError(f'config is not valid YAML: {e}', path=str(path))
    return raw if raw is not None else {}


def parse_override(text):
    """
    Split ``dotted.key=value``; the value follows YAML scalar rules

    :return: (list of str, object)
    """
    if '=' not in text:
        raise ConfigurationError(f'override must look like key=value, received {text!r}')
    key, value = text.split('=', 1)
    path = [part for part in key.strip().split('.') if part]
    if not path:
        raise ConfigurationError(f'override has an empty key: {text!r}')
    try:
        parsed = yaml.safe_load(value)
    except yaml.YAMLError as e:
        raise ConfigurationError(f'cannot parse override value {value!r}: {e}')
    return path, parsed


def set_path(raw: dict, path: List[str], value):
    node = raw
    for part in path[:-1]:
        child = node.get(part)
        if child is None:
            child = node[part] = {}
        if not isinstance(child, dict):
            raise ConfigurationError(f'cannot set {".".join(path)}: {part} is not a section')
        node = child
    node[path[-1]] = value


def apply_overrides(raw: dict, overrides) -> dict:
    """
    Apply ``key=value`` overrides to a raw config

    An override of a swept key removes that key from the sweep.
    """
    raw = copy.deepcopy(raw)
    for text in overrides or []:
        path, value = parse_override(text)
        sweep = raw.get(SWEEP_KEY)
        if isinstance(sweep, dict):
            sweep.pop('.'.join(path), None)
        set_path(raw, path, value)
    return raw


def _variant_name(assignments):
    return '_'.join(f'{key.split(".")[-1]}-{value}' for key, value in assignments)


def expand_sweep(raw: dict):
    """
    Expand the optional ``sweep`` section into named raw configs

    :return: list of (str, dict)
    """
    raw = copy.deepcopy(raw)
    sweep = raw.pop(SWEEP_KEY, None) or {}
    if not isinstance(sweep, dict):
        raise ConfigurationError('sweep must map dotted keys to lists of values')
    if not sweep:
        return [(DEFAULT_VARIANT, raw)]
    keys = list(sweep.keys())
    for key in keys:
        if not isinstance(sweep[key], list) or not sweep[key]:
            raise ConfigurationError(f'sweep.{key} must be a non-empty list')
    variants = []
    for values in itertools.product(*(sweep[key] for key in keys)):
        variant = copy.deepcopy(raw)
        for key, value in zip(keys, values):
            set_path(variant, key.split('.'), value)
        variants.append((_variant_name(list(zip(keys, values))), variant))
    return variants


def load_experiments(path, overrides=None):
    """
    Read, override, expand and validate a config file

    :param path: str
    :param overrides: list of str
    :return: list of (str, ExperimentConfig)
    """
    raw = apply_overrides(read_yaml(path), overrides)
    experiments = [(name, validate_spec(variant)) for name, variant in expand_sweep(raw)]
    logger.debug(f'Loaded {len(experiments)} variant(s) from {path}')
    return experiments
