"""
Round-to-round divergence of the global model, with and without the shift.

For one layer with P parameters, previous model w^t (mean m^t) and aggregate w^{t+1}
(mean m^{t+1}), shifting by (I/K) m^{t+1} changes the squared distance to w^t by

    D_FA^2 - D_FS^2 = (I P / K) ((2 - I/K) (m^{t+1})^2 - 2 m^{t+1} m^t)

whose sign is that of (K + S) / (2K) - m^t / m^{t+1}.
"""
from typing import List

import numpy as np

from fedshift.model.params import LayeredParams

CONDITION_SMALLER = 'fedshift_smaller'
CONDITION_GREATER = 'fedshift_greater'
CONDITION_EQUAL = 'equal'

RESIDUAL_TOL = 1e-8
CONDITION_TOL = 1e-12
SIGN_FLOOR = 1e-10


def _sq_distance(a, b):
    diff = a.astype(np.float64) - b.astype(np.float64)
    return float(np.dot(diff, diff))


def round_divergence(w_prev: LayeredParams, w_agg: LayeredParams, w_shifted: LayeredParams):
    """
    Squared L2 distance of the unshifted and shifted aggregate to the previous model, per layer

    :return: (dict, dict)
    """
    w_prev.check_layout(w_agg)
    w_prev.check_layout(w_shifted)
    d_fa_sq = {}
    d_fs_sq = {}
    for (name, prev), (_, agg), (_, shifted) in zip(w_prev, w_agg, w_shifted):
        d_fa_sq[name] = _sq_distance(agg, prev)
        d_fs_sq[name] = _sq_distance(shifted, prev)
    return d_fa_sq, d_fs_sq


def predicted_difference(m_prev, m_curr, I, K, P):  # noqa: E741
    ratio = I / K
    return (I * P / K) * ((2.0 - ratio) * m_curr * m_curr - 2.0 * m_curr * m_prev)


def theorem2_check(d_fa_sq, d_fs_sq, m_prev, m_curr, I, K, P):  # noqa: E741
    """
    Measured D_FA^2 - D_FS^2 minus its closed form

    :return: float, zero up to rounding
    """
    return (d_fa_sq - d_fs_sq) - predicted_difference(m_prev, m_curr, I, K, P)


def residual_within_tolerance(residual, d_fa_sq):
    return abs(residual) <= RESIDUAL_TOL * (1.0 + d_fa_sq)


def divergence_condition(m_prev, m_curr, S, K):
    """
    Whether shifting moves the new model closer to (smaller) or farther from (greater) the
    previous one

    :return: str, fedshift_smaller | fedshift_greater | equal
    """
    if S == K or m_curr == 0:
        return CONDITION_EQUAL
    threshold = (K + S) / (2.0 * K)
    ratio = m_prev / m_curr
    if abs(threshold - ratio) <= CONDITION_TOL * max(1.0, abs(threshold), abs(ratio)):
        return CONDITION_EQUAL
    return CONDITION_SMALLER if threshold > ratio else CONDITION_GREATER


def condition_matches(condition, d_fa_sq, d_fs_sq):
    """Whether a classification agrees with the measured sign, ignoring differences below 1e-10"""
    difference = d_fa_sq - d_fs_sq
    if abs(difference) <= SIGN_FLOOR:
        return True
    return condition == (CONDITION_SMALLER if difference > 0 else CONDITION_GREATER)


def client_drift(w_prev_global: LayeredParams, local_models: List[LayeredParams]) -> float:
    """Mean over clients of the whole-model L2 distance to the previous global model"""
    if not local_models:
        return 0.0
    distances = []
    for model in local_models:
        w_prev_global.check_layout(model)
        total = sum(_sq_distance(a, b) for (_, a), (_, b) in zip(model, w_prev_global))
        distances.append(np.sqrt(total))
    return float(np.mean(distances))


def mean_trace(records):
    """
    Running maximum of |m^{t+1}| over rounds and layers

    :param records: list of RoundRecord
    :return: (float, list of float), the overall max and each round's max over layers
    """
    per_round = [max((abs(m) for m in record.m_curr.values()), default=0.0) for record in records]
    return max(per_round, default=0.0), per_round
