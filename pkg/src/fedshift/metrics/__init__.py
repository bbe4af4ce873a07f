from .divergence import (CONDITION_EQUAL, CONDITION_GREATER, CONDITION_SMALLER, client_drift, condition_matches,
                         divergence_condition, mean_trace, predicted_difference, residual_within_tolerance,
                         round_divergence, theorem2_check)
from .evaluate import evaluate, label_group_share
from .histogram import weight_histogram
from .records import RoundRecord
from .summary import summarize_records, summarize_variants
