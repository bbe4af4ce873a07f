"""
Numerical checks of the shift identities and the uniform codec bound.

Each check raises IdentityViolation on the first failing case and otherwise returns the
number of cases it covered.
"""
import attr
import numpy as np

from fedshift.common.logger import get_logger
from fedshift.common.paths import SMOKE_CONFIG
from fedshift.exceptions import IdentityViolation
from fedshift.metrics.divergence import (condition_matches, divergence_condition, residual_within_tolerance,
                                         round_divergence, theorem2_check)
from fedshift.model.params import LayeredParams, layer_mean
from fedshift.quantization.types import MAX_BITS, MIN_BITS
from fedshift.quantization.uniform import dequant_uniform, half_step, quant_uniform
from fedshift.server.aggregate import shift_global
from .config import load_experiments
from .runner import run_experiment

logger = get_logger(__name__)

MEAN_TOL = 1e-6
MAX_LAYER_SIZE = 500
MAX_CLIENTS = 20


def _random_layer(rng, size):
    scale = 10.0 ** rng.uniform(-3, 1)
    offset = rng.normal(scale=scale)
    return rng.normal(loc=offset, scale=scale, size=size)


def check_shift_mean(cases=1000, seed=0):
    """After shifting, every layer's mean is (S/K) times the aggregate's mean"""
    rng = np.random.default_rng(seed)
    for case in range(cases):
        K = int(rng.integers(1, MAX_CLIENTS + 1))
        I = int(rng.integers(0, K + 1))  # noqa: E741
        aggregated = LayeredParams(layers=[('layer', _random_layer(rng, int(rng.integers(1, MAX_LAYER_SIZE + 1))))])
        shifted, means = shift_global(aggregated, I, K)
        m = means['layer']
        expected = (K - I) / K * m
        got = layer_mean(shifted, 'layer')
        if abs(got - expected) > MEAN_TOL * (1 + abs(m)):
            raise IdentityViolation(f'shifted mean {got!r} differs from {expected!r}', case=case, I=I, K=K)
    return cases


def check_divergence_identity(cases=200, seed=0):
    """Measured D_FA^2 - D_FS^2 matches its closed form and the predicted sign on random rounds"""
    rng = np.random.default_rng(seed)
    for case in range(cases):
        K = int(rng.integers(1, MAX_CLIENTS + 1))
        I = int(rng.integers(0, K + 1))  # noqa: E741
        size = int(rng.integers(1, MAX_LAYER_SIZE + 1))
        w_prev = LayeredParams(layers=[('layer', _random_layer(rng, size).astype(np.float32))])
        aggregated = LayeredParams(layers=[('layer', _random_layer(rng, size))])
        shifted, means = shift_global(aggregated, I, K)
        d_fa_sq, d_fs_sq = round_divergence(w_prev, aggregated, shifted)
        d_fa, d_fs = d_fa_sq['layer'], d_fs_sq['layer']
        m_prev = layer_mean(w_prev, 'layer')
        residual = theorem2_check(d_fa, d_fs, m_prev, means['layer'], I, K, size)
        if not residual_within_tolerance(residual, d_fa):
            raise IdentityViolation(f'divergence identity residual {residual:.3e}', case=case, I=I, K=K)
        condition = divergence_condition(m_prev, means['layer'], K - I, K)
        if not condition_matches(condition, d_fa, d_fs):
            raise IdentityViolation(f'condition {condition} disagrees with d_fa_sq={d_fa!r}, d_fs_sq={d_fs!r}',
                                    case=case, I=I, K=K)
    return cases


def check_uniform_bound(cases=200, seed=0):
    """Uniform reconstruction error never exceeds half a step plus two float32 ulps"""
    rng = np.random.default_rng(seed)
    for case in range(cases):
        bits = int(rng.integers(MIN_BITS, MAX_BITS + 1))
        values = _random_layer(rng, int(rng.integers(1, MAX_LAYER_SIZE + 1))).astype(np.float32)
        q = quant_uniform(values, bits)
        error = np.max(np.abs(dequant_uniform(q).astype(np.float64) - values.astype(np.float64)))
        largest = max(abs(q.codec.w_min), abs(q.codec.w_max))
        bound = half_step(q.codec) + 2 * float(np.spacing(np.float32(largest)))
        if error > bound:
            raise IdentityViolation(f'uniform error {error!r} exceeds {bound!r}', case=case, bits=bits)
    return cases


def check_live_run(config_path=SMOKE_CONFIG, rounds=None):
    """
    Run a config with the per-round identity asserts switched on (they always are)

    :return: int, rounds checked
    """
    checked = 0
    for name, cfg in load_experiments(config_path):
        if rounds is not None:
            cfg = attr.evolve(cfg, federation=attr.evolve(cfg.federation, rounds=rounds))
        checked += len(run_experiment(cfg))
        logger.debug(f'Live identities held for variant {name}')
    return checked


def run_identity_suite(config_path=SMOKE_CONFIG, seed=0):
    """
    :return: dict of check name -> cases covered
    """
    results = dict(
        shift_mean=check_shift_mean(seed=seed),
        divergence_identity=check_divergence_identity(seed=seed),
        uniform_bound=check_uniform_bound(seed=seed),
        live_rounds=check_live_run(config_path),
    )
    for check, count in results.items():
        logger.info(f'{check}: {count} cases passed')
    return results
