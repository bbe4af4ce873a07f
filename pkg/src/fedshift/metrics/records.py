from typing import Dict

import attr
import numpy as np


def _counts(value):
    return np.asarray(value, dtype=np.int64)


@attr.define(kw_only=True, eq=False)
class RoundRecord:
    """
    Metrics of one round

    Per-layer dicts are keyed by layer name, or by ``all`` when the shift scope is global.
    """
    seed: int = attr.ib(default=0)
    round: int = attr.ib()
    test_accuracy: float = attr.ib()
    test_loss: float = attr.ib()
    train_loss: float = attr.ib(default=float('nan'))
    d_fa_sq: Dict[str, float] = attr.ib(factory=dict)
    d_fs_sq: Dict[str, float] = attr.ib(factory=dict)
    theorem2_residual: Dict[str, float] = attr.ib(factory=dict)
    m_prev: Dict[str, float] = attr.ib(factory=dict)
    m_curr: Dict[str, float] = attr.ib(factory=dict)
    client_drift: float = attr.ib(default=0.0)
    num_inferior: int = attr.ib(default=0)
    payload_bytes_total: int = attr.ib(default=0)
    prediction_counts: np.ndarray = attr.ib(factory=lambda: np.zeros(0, dtype=np.int64), converter=_counts)

    @property
    def groups(self):
        return list(self.d_fa_sq.keys())

    @property
    def total_d_fa_sq(self):
        return float(sum(self.d_fa_sq.values()))

    @property
    def total_d_fs_sq(self):
        return float(sum(self.d_fs_sq.values()))
