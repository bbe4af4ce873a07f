from .csv_loader import load_csv_dataset, standardize, write_csv_dataset
from .plan import (DEFAULT_LABELS_PER_CLIENT, GROUP_INFERIOR, GROUP_SUPERIOR, GROUPS, PartitionPlan,
                   dirichlet_partition, shard_partition)
from .synthetic import split_dataset, synth_dataset
