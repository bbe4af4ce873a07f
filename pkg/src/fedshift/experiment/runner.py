import os

import pandas as pd

from fedshift.common.logger import get_logger
from fedshift.common.paths import PAYLOAD_DIR, RECORDS_FILE, SUMMARY_FILE
from fedshift.exceptions import FedShiftError, OutputError
from fedshift.metrics.summary import summarize_records, summarize_variants
from .config import DEFAULT_VARIANT, ExperimentConfig
from .simulation import Simulation
from .writer import emit_csv, emit_summary

logger = get_logger(__name__)


def run_experiment(cfg: ExperimentConfig, parallelism=None, output_dir=None):
    """
    Run every configured seed

    When ``output_dir`` is given the records are written to ``records.csv`` there after every
    seed, and whatever was gathered is flushed before an error propagates.

    :param cfg: ExperimentConfig
    :param parallelism: int | None, client threads; defaults to federation.parallelism
    :param output_dir: str | None
    :return: list of RoundRecord ordered by (seed, round)
    """
    parallelism = cfg.federation.parallelism if parallelism is None else parallelism
    records_path = None if output_dir is None else os.path.join(output_dir, RECORDS_FILE)
    payload_dir = None
    if output_dir is not None and cfg.dump_payloads:
        payload_dir = os.path.join(output_dir, PAYLOAD_DIR)
        try:
            os.makedirs(payload_dir, exist_ok=True)
        except OSError as e:
            raise OutputError(f'cannot create payload directory: {e}', path=payload_dir)

    records = []
    for seed in cfg.seeds:
        try:
            simulation = Simulation.from_config(cfg, seed, payload_dir=payload_dir)
            simulation.run(parallelism=parallelism, on_record=records.append)
        except FedShiftError as e:
            e.add_context(seed=seed)
            logger.error(f'Run {cfg.name} aborted: {e}')
            if records_path is not None:
                emit_csv(records, records_path)
            raise
        if records_path is not None:
            emit_csv(records, records_path)
        final = records[-1]
        logger.info(f'{cfg.name} seed {seed}: final accuracy {final.test_accuracy:.4f} after {final.round + 1} rounds')
    return records


def run_variants(variants, parallelism=None, output_dir=None):
    """
    Run named config variants, each into its own subdirectory, and write a summary

    :param variants: list of (str, ExperimentConfig)
    :param parallelism: int | None
    :param output_dir: str | None, defaults to each config's output_dir
    :return: (dict of str -> list of RoundRecord, pd.DataFrame)
    """
    results = {}
    summaries = []
    root = None
    for name, cfg in variants:
        root = output_dir if output_dir is not None else cfg.output_dir
        target = root if len(variants) == 1 and name == DEFAULT_VARIANT else os.path.join(root, name)
        results[name] = run_experiment(cfg, parallelism=parallelism, output_dir=target)
        logger.info(f'Variant {name} written to {os.path.join(target, RECORDS_FILE)}')
        summaries.append(summarize_records(results[name], name))
    summary = pd.concat(summaries, ignore_index=True) if summaries else summarize_records([])
    if root is not None:
        emit_summary(summary, os.path.join(root, SUMMARY_FILE))
        if len(variants) > 1:
            emit_summary(summarize_variants(summary), os.path.join(root, f'variants_{SUMMARY_FILE}'))
    return results, summary
