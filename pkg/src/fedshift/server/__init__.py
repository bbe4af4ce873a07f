from .aggregate import (GLOBAL_GROUP, SCOPE_GLOBAL, SCOPE_PER_LAYER, SCOPES, WEIGHTINGS, WEIGHTS_BY_SAMPLES,
                        WEIGHTS_UNIFORM, ServerState, aggregate_mean, aggregation_weights, dequantize_uploads,
                        scaffold_server_update, shift_global)
from .selection import RoundSelection, select_clients, selection_size
