from .config import (DEFAULT_VARIANT, PARTITION_DIRICHLET, PARTITION_SHARD, PARTITIONS, AggregationConfig, CsvConfig,
                     ExperimentConfig, FederationConfig, ModelConfig, PartitionConfig, SyntheticConfig,
                     apply_overrides, expand_sweep, load_experiments, parse_override, read_yaml, validate_spec)
from .identities import (check_divergence_identity, check_live_run, check_shift_mean, check_uniform_bound,
                         run_identity_suite)
from .runner import run_experiment, run_variants
from .simulation import Simulation, build_datasets, build_partition
from .writer import csv_columns, emit_csv, records_frame
