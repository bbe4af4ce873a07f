import os

import attr
import numpy as np
import yaml

from fedshift.experiment.config import ExperimentConfig, apply_overrides, validate_spec
from fedshift.model.dataset import Dataset
from fedshift.model.network import ModelSpec
from fedshift.model.params import LayeredParams

SLOW_ENV = 'FEDSHIFT_RUN_SLOW'


def get_root_path():
    return os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))


def slow_tests_enabled():
    return os.environ.get(SLOW_ENV) == '1'


class FixtureHelper:
    def __init__(self):
        pass

    @classmethod
    def get_spec_fixture(cls, name='smoke'):
        root_path = get_root_path()
        with open(f"{root_path}/configs/{name}.yml", "r") as stream:
            return yaml.safe_load(stream)

    @classmethod
    def get_config(cls, name='smoke', overrides=None, keep_sweep=False) -> ExperimentConfig:
        raw = cls.get_spec_fixture(name)
        if not keep_sweep:
            raw.pop('sweep', None)
        return validate_spec(apply_overrides(raw, overrides))

    @classmethod
    def with_rounds(cls, cfg: ExperimentConfig, rounds) -> ExperimentConfig:
        return attr.evolve(cfg, federation=attr.evolve(cfg.federation, rounds=rounds))

    @classmethod
    def random_params(cls, seed=0, sizes=(('a', 12), ('b', 5)), dtype=np.float32, scale=1.0, offset=0.0):
        rng = np.random.default_rng(seed)
        return LayeredParams(layers=[(name, (rng.normal(size=size) * scale + offset).astype(dtype))
                                     for name, size in sizes])

    @classmethod
    def small_spec(cls, input_dim=4, hidden_dims=(5,), num_classes=3):
        return ModelSpec(input_dim=input_dim, hidden_dims=hidden_dims, num_classes=num_classes)

    @classmethod
    def small_dataset(cls, seed=0, num_samples=12, input_dim=4, num_classes=3):
        rng = np.random.default_rng(seed)
        labels = np.arange(num_samples) % num_classes
        return Dataset(features=rng.normal(size=(num_samples, input_dim)), labels=labels)
