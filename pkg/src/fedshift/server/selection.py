import math
from typing import List

import attr
import numpy as np

from fedshift.common.rng import STREAM_SELECT, make_rng
from fedshift.exceptions import ConfigurationError


@attr.define(kw_only=True, frozen=True)
class RoundSelection:
    selected: List[int] = attr.ib(converter=list)
    inferior_selected: List[int] = attr.ib(converter=list)
    superior_selected: List[int] = attr.ib(converter=list)

    @property
    def K(self):
        return len(self.selected)

    @property
    def I(self):  # noqa: E743
        return len(self.inferior_selected)

    @property
    def S(self):
        return len(self.superior_selected)


def selection_size(num_clients, participation):
    # C*N can land a hair above an integer (0.7 * 10), which ceil would bump
    return max(1, math.ceil(participation * num_clients - 1e-9))


def select_clients(clients, participation: float, seed: int, round_index: int) -> RoundSelection:
    """
    Uniform sample of ceil(C * N) clients without replacement

    :param clients: list of ClientState, indexed by client id
    :param participation: float, C in (0, 1]
    :param seed: int, master seed
    :param round_index: int
    :return: RoundSelection, ids ascending
    """
    if not 0 < participation <= 1:
        raise ConfigurationError(f'participation must lie in (0, 1], received {participation}')
    count = selection_size(len(clients), participation)
    rng = make_rng(seed, STREAM_SELECT, round_index)
    chosen = sorted(int(i) for i in rng.choice(len(clients), size=count, replace=False))
    inferior = [i for i in chosen if clients[i].is_inferior]
    superior = [i for i in chosen if not clients[i].is_inferior]
    return RoundSelection(selected=chosen, inferior_selected=inferior, superior_selected=superior)
