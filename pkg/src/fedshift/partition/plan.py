import math
from typing import List

import attr
import numpy as np

from fedshift.common.logger import get_logger
from fedshift.exceptions import ConfigurationError
from fedshift.model.dataset import Dataset

logger = get_logger(__name__)

GROUP_SUPERIOR = 'superior'
GROUP_INFERIOR = 'inferior'
GROUPS = [GROUP_SUPERIOR, GROUP_INFERIOR]

DEFAULT_LABELS_PER_CLIENT = 2


def _assignments(value):
    return [np.sort(np.asarray(indices, dtype=np.int64)) for indices in value]


@attr.define(kw_only=True, frozen=True, eq=False)
class PartitionPlan:
    assignments: List[np.ndarray] = attr.ib(converter=_assignments)
    group_of: List[str] = attr.ib(converter=list)

    @group_of.validator
    def _check(self, attribute, value):
        if len(value) != len(self.assignments):
            raise ConfigurationError(f'{len(self.assignments)} assignments but {len(value)} groups')
        for group in value:
            if group not in GROUPS:
                raise ConfigurationError(f'group must be one of {", ".join(GROUPS)}, received {group}')
        for client_id, indices in enumerate(self.assignments):
            if indices.size == 0:
                raise ConfigurationError(f'client {client_id} has no samples')
        merged = np.concatenate(self.assignments)
        if np.unique(merged).size != merged.size:
            raise ConfigurationError('client assignments overlap')

    @property
    def num_clients(self):
        return len(self.assignments)

    def clients_in(self, group):
        return [client_id for client_id, g in enumerate(self.group_of) if g == group]

    def label_sets(self, data: Dataset):
        return [set(np.unique(data.labels[indices]).tolist()) for indices in self.assignments]


def _deal_shards(rng, indices_by_label, num_clients, labels_per_client):
    """
    Cut each label into shards and deal ``labels_per_client`` shards to every client

    Shard counts per label are as even as possible and every shard holds one label, so no
    client ends up with more than ``labels_per_client`` labels.
    """
    labels = sorted(indices_by_label)
    total_shards = num_clients * labels_per_client
    shard_counts = [len(chunk) for chunk in np.array_split(np.arange(total_shards), len(labels))]
    shards = []
    for label, count in zip(labels, shard_counts):
        members = rng.permutation(indices_by_label[label])
        if count > members.size or count == 0:
            raise ConfigurationError(f'label {label} has {members.size} samples, '
                                     f'not enough for {count} shards')
        shards.extend(np.array_split(members, count))
    order = rng.permutation(len(shards))
    return [np.concatenate([shards[s] for s in order[c * labels_per_client:(c + 1) * labels_per_client]])
            for c in range(num_clients)]


def shard_partition(data: Dataset, num_clients: int, labels_per_client: int = DEFAULT_LABELS_PER_CLIENT,
                    seed: int = 0) -> PartitionPlan:
    """
    Disjoint-label shard split

    Even labels go to the superior half (client ids [0, N/2)), odd labels to the inferior
    half ([N/2, N)). Each client receives ``labels_per_client`` equal shards.

    :return: PartitionPlan
    """
    if num_clients < 2 or num_clients % 2:
        raise ConfigurationError(f'num_clients must be even and >= 2, received {num_clients}')
    if labels_per_client < 1:
        raise ConfigurationError(f'labels_per_client must be positive, received {labels_per_client}')
    present = np.unique(data.labels)
    if present.size < 2:
        raise ConfigurationError(f'shard partition needs at least 2 classes, data has {present.size}')
    rng = np.random.default_rng(seed)
    half = num_clients // 2
    assignments = []
    for parity in (0, 1):
        group_labels = [int(label) for label in present if label % 2 == parity]
        if not group_labels:
            raise ConfigurationError(f'no {"even" if parity == 0 else "odd"} labels to shard')
        by_label = {label: np.flatnonzero(data.labels == label) for label in group_labels}
        assignments.extend(_deal_shards(rng, by_label, half, labels_per_client))
    group_of = [GROUP_SUPERIOR] * half + [GROUP_INFERIOR] * half
    return PartitionPlan(assignments=assignments, group_of=group_of)


def _dirichlet(rng, alpha, size):
    proportions = rng.dirichlet(np.full(size, alpha))
    # tiny alpha can underflow every gamma draw
    while np.any(np.isnan(proportions)):
        proportions = rng.dirichlet(np.full(size, alpha))
    return proportions


def dirichlet_partition(data: Dataset, num_clients: int, alpha: float, inferior_fraction: float,
                        seed: int) -> PartitionPlan:
    """
    Per-class Dirichlet(alpha) allocation over clients

    Group membership is drawn uniformly at random so that round(inferior_fraction * N)
    clients are inferior. Empty clients are re-fed one sample at a time from the largest.

    :return: PartitionPlan
    """
    if alpha <= 0:
        raise ConfigurationError(f'alpha must be positive, received {alpha}')
    if not 0 <= inferior_fraction <= 1:
        raise ConfigurationError(f'inferior_fraction must lie in [0, 1], received {inferior_fraction}')
    if num_clients < 1 or num_clients > data.num_samples:
        raise ConfigurationError(f'cannot split {data.num_samples} samples over {num_clients} clients')
    rng = np.random.default_rng(seed)
    local = [[] for _ in range(num_clients)]
    for label in np.unique(data.labels):
        members = rng.permutation(np.flatnonzero(data.labels == label))
        proportions = _dirichlet(rng, alpha, num_clients)
        cuts = (np.cumsum(proportions) * members.size).astype(int)[:-1]
        for client_id, chunk in enumerate(np.split(members, cuts)):
            local[client_id].extend(chunk.tolist())

    sizes = [len(indices) for indices in local]
    while min(sizes) == 0:
        empty = int(np.argmin(sizes))
        largest = int(np.argmax(sizes))
        logger.debug(f'client {empty} is empty, moving one sample from client {largest}')
        local[empty].append(local[largest].pop())
        sizes = [len(indices) for indices in local]

    num_inferior = int(math.floor(inferior_fraction * num_clients + 0.5))
    inferior = set(rng.permutation(num_clients)[:num_inferior].tolist())
    group_of = [GROUP_INFERIOR if c in inferior else GROUP_SUPERIOR for c in range(num_clients)]
    return PartitionPlan(assignments=local, group_of=group_of)
