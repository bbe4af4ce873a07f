"""
One seed of a federated run: data, partition, clients, server, and the round loop body.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import attr

from fedshift.client.local import local_round
from fedshift.client.state import ALGORITHM_SCAFFOLD, ClientState
from fedshift.common.logger import get_logger
from fedshift.common.paths import PAYLOAD_EXT
from fedshift.common.rng import STREAM_CLIENT, STREAM_DATA, STREAM_INIT, STREAM_PARTITION, derive_seed
from fedshift.exceptions import FedShiftError, IdentityViolation
from fedshift.metrics.divergence import (client_drift, condition_matches, divergence_condition,
                                         residual_within_tolerance, round_divergence, theorem2_check)
from fedshift.metrics.evaluate import evaluate
from fedshift.metrics.records import RoundRecord
from fedshift.model.dataset import Dataset
from fedshift.model.network import ModelSpec, init_params
from fedshift.model.params import LayeredParams, layer_means
from fedshift.partition.csv_loader import load_csv_dataset
from fedshift.partition.plan import PartitionPlan, dirichlet_partition, shard_partition
from fedshift.partition.synthetic import split_dataset, synth_dataset
from fedshift.quantization.payload import full_precision_size, payload_size, write_payload
from fedshift.server.aggregate import (GLOBAL_GROUP, SCOPE_GLOBAL, ServerState, aggregate_mean, aggregation_weights,
                                       dequantize_uploads, scaffold_server_update, shift_global)
from fedshift.server.selection import select_clients
from .config import PARTITION_SHARD, ExperimentConfig

logger = get_logger(__name__)


def build_datasets(cfg: ExperimentConfig, seed: int):
    """
    Train/test data for one seed

    Synthetic train and test sets are drawn from the same class means; CSV data is split
    stratified by class.

    :return: (Dataset, Dataset, int), train, test and number of classes
    """
    data_seed = derive_seed(seed, STREAM_DATA)
    if cfg.synthetic is not None:
        s = cfg.synthetic
        per_class = s.samples_per_class + s.test_samples_per_class
        data = synth_dataset(s.num_classes, per_class, s.input_dim, s.class_separation, data_seed)
        train, test = split_dataset(data, s.test_samples_per_class / per_class, data_seed)
        return train, test, s.num_classes
    data = load_csv_dataset(cfg.csv.path, cfg.csv.label_column)
    train, test = split_dataset(data, cfg.csv.test_fraction, data_seed)
    return train, test, data.num_classes


def build_partition(cfg: ExperimentConfig, train: Dataset, seed: int) -> PartitionPlan:
    partition_seed = derive_seed(seed, STREAM_PARTITION)
    p = cfg.partition
    if p.scheme == PARTITION_SHARD:
        return shard_partition(train, cfg.federation.num_clients, p.labels_per_client, partition_seed)
    return dirichlet_partition(train, cfg.federation.num_clients, p.alpha, p.inferior_fraction, partition_seed)


def payload_path(payload_dir, seed, round_index, client_id):
    return os.path.join(payload_dir, f'seed{seed}_round{round_index}_client{client_id}{PAYLOAD_EXT}')


@attr.define(kw_only=True)
class Simulation:
    config: ExperimentConfig = attr.ib()
    seed: int = attr.ib()
    spec: ModelSpec = attr.ib()
    train: Dataset = attr.ib()
    test: Dataset = attr.ib()
    clients: List[ClientState] = attr.ib()
    server: ServerState = attr.ib()
    payload_dir: Optional[str] = attr.ib(default=None)

    @classmethod
    def from_config(cls, config: ExperimentConfig, seed: int, payload_dir=None):
        train, test, num_classes = build_datasets(config, seed)
        spec = ModelSpec(input_dim=train.input_dim, hidden_dims=config.model.hidden_dims, num_classes=num_classes,
                         activation=config.model.activation)
        plan = build_partition(config, train, seed)
        clients = [ClientState(id=i, group=plan.group_of[i], data=train.subset(indices),
                               rng_seed=derive_seed(seed, STREAM_CLIENT, i))
                   for i, indices in enumerate(plan.assignments)]
        global_params = init_params(spec, derive_seed(seed, STREAM_INIT))
        server_control = global_params.zeros_like() if config.local.algorithm == ALGORITHM_SCAFFOLD else None
        server = ServerState(global_params=global_params, server_control=server_control, rng_seed=seed)
        logger.debug(f'seed {seed}: {len(clients)} clients, {sum(c.is_inferior for c in clients)} inferior, '
                     f'{spec.num_params} parameters')
        return Simulation(config=config, seed=seed, spec=spec, train=train, test=test, clients=clients,
                          server=server, payload_dir=payload_dir)

    def _train_client(self, client_id, round_index):
        try:
            return local_round(self.clients[client_id], self.server.global_params, self.config.local, self.spec,
                               server_control=self.server.server_control, round_index=round_index)
        except FedShiftError as e:
            raise e.add_context(client=client_id)

    def _divergence_metrics(self, w_prev: LayeredParams, aggregated: LayeredParams, shifted: LayeredParams,
                            I, K):  # noqa: E741
        if self.config.aggregation.shift_scope == SCOPE_GLOBAL:
            w_prev = w_prev.as_single_layer(GLOBAL_GROUP)
            aggregated = aggregated.as_single_layer(GLOBAL_GROUP)
            shifted = shifted.as_single_layer(GLOBAL_GROUP)
        d_fa_sq, d_fs_sq = round_divergence(w_prev, aggregated, shifted)
        m_prev = layer_means(w_prev)
        m_curr = layer_means(aggregated)
        residuals = {}
        for name, size in zip(aggregated.names, aggregated.sizes):
            residual = theorem2_check(d_fa_sq[name], d_fs_sq[name], m_prev[name], m_curr[name], I, K, size)
            if not residual_within_tolerance(residual, d_fa_sq[name]):
                raise IdentityViolation(f'divergence identity residual {residual:.3e} on {name}', layer=name)
            condition = divergence_condition(m_prev[name], m_curr[name], K - I, K)
            if not condition_matches(condition, d_fa_sq[name], d_fs_sq[name]):
                raise IdentityViolation(f'divergence condition {condition} disagrees with '
                                        f'd_fa_sq={d_fa_sq[name]:.9g}, d_fs_sq={d_fs_sq[name]:.9g} on {name}',
                                        layer=name)
            residuals[name] = residual
        return dict(d_fa_sq=d_fa_sq, d_fs_sq=d_fs_sq, theorem2_residual=residuals, m_prev=m_prev, m_curr=m_curr)

    def run_round(self, pool: Optional[ThreadPoolExecutor] = None) -> RoundRecord:
        """
        Select, train, dequantize, aggregate, shift, measure, evaluate

        :param pool: ThreadPoolExecutor | None, runs the selected clients concurrently
        :return: RoundRecord
        """
        round_index = self.server.round
        selection = select_clients(self.clients, self.config.federation.participation, self.server.rng_seed,
                                   round_index)
        train = lambda client_id: self._train_client(client_id, round_index)  # noqa: E731
        results = list(pool.map(train, selection.selected) if pool is not None else map(train, selection.selected))
        uploads = [upload for upload, _ in results]
        for state in (state for _, state in results):
            self.clients[state.id] = state

        models = dequantize_uploads(uploads)
        aggregated = aggregate_mean(models, aggregation_weights(uploads, self.config.aggregation.weights))
        I = selection.I if self.config.aggregation.shift_enabled else 0  # noqa: E741
        shifted, _ = shift_global(aggregated, I, selection.K, self.config.aggregation.shift_scope)

        w_prev = self.server.global_params
        metrics = self._divergence_metrics(w_prev, aggregated, shifted, I, selection.K)
        drift = client_drift(w_prev, models)

        payload_bytes = 0
        for upload in uploads:
            if upload.is_quantized:
                payload_bytes += sum(payload_size(upload.payload))
                if self.payload_dir is not None:
                    write_payload(payload_path(self.payload_dir, self.seed, round_index, upload.client_id),
                                  upload.payload)
            else:
                payload_bytes += full_precision_size(upload.payload.num_params)
            if upload.control_delta is not None:
                payload_bytes += full_precision_size(upload.control_delta.num_params)

        server_control = self.server.server_control
        if server_control is not None:
            deltas = [upload.control_delta for upload in uploads]
            server_control = scaffold_server_update(server_control, deltas, len(self.clients))
        new_global = shifted.astype(w_prev.dtype)
        self.server = attr.evolve(self.server, global_params=new_global, round=round_index + 1,
                                  server_control=server_control)

        accuracy, test_loss, counts = evaluate(new_global, self.spec, self.test)
        _, train_loss, _ = evaluate(new_global, self.spec, self.train)
        logger.debug(f'seed {self.seed} round {round_index}: K={selection.K} I={selection.I} '
                     f'accuracy={accuracy:.4f} loss={test_loss:.4f}')
        return RoundRecord(seed=self.seed, round=round_index, test_accuracy=accuracy, test_loss=test_loss,
                           train_loss=train_loss, client_drift=drift, num_inferior=selection.I,
                           payload_bytes_total=payload_bytes, prediction_counts=counts, **metrics)

    def run(self, rounds=None, parallelism=1, on_record=None):
        """
        Run the configured number of rounds

        :param rounds: int | None, defaults to federation.rounds
        :param parallelism: int, client threads per round
        :param on_record: callable(RoundRecord) | None
        :return: list of RoundRecord
        """
        rounds = self.config.federation.rounds if rounds is None else rounds
        records = []
        pool = ThreadPoolExecutor(max_workers=parallelism) if parallelism > 1 else None
        try:
            for _ in range(rounds):
                try:
                    record = self.run_round(pool)
                except FedShiftError as e:
                    raise e.add_context(seed=self.seed, round=self.server.round)
                records.append(record)
                if on_record is not None:
                    on_record(record)
        finally:
            if pool is not None:
                pool.shutdown()
        return records
