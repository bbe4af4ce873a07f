import numpy as np
import pandas as pd

from .divergence import mean_trace
from .evaluate import label_group_share

SMOOTHING_WINDOW = 10


def summarize_records(records, variant='default'):
    """
    One row per seed: final and smoothed accuracy, mean divergences, bias share, max |m|

    :param records: list of RoundRecord, possibly from several seeds
    :param variant: str
    :return: pd.DataFrame
    """
    rows = []
    seeds = sorted({record.seed for record in records})
    for seed in seeds:
        run = sorted((r for r in records if r.seed == seed), key=lambda r: r.round)
        accuracy = pd.Series([r.test_accuracy for r in run])
        smoothed = accuracy.rolling(SMOOTHING_WINDOW, min_periods=1).mean()
        max_abs_m, _ = mean_trace(run)
        rows.append(dict(
            variant=variant,
            seed=seed,
            rounds=len(run),
            final_accuracy=float(accuracy.iloc[-1]),
            smoothed_accuracy=float(smoothed.iloc[-1]),
            mean_d_fa_sq=float(np.mean([r.total_d_fa_sq for r in run])),
            mean_d_fs_sq=float(np.mean([r.total_d_fs_sq for r in run])),
            odd_label_share=label_group_share(run[-1].prediction_counts),
            max_abs_m=max_abs_m,
            payload_bytes=int(sum(r.payload_bytes_total for r in run)),
        ))
    return pd.DataFrame(rows, columns=['variant', 'seed', 'rounds', 'final_accuracy', 'smoothed_accuracy',
                                       'mean_d_fa_sq', 'mean_d_fs_sq', 'odd_label_share', 'max_abs_m',
                                       'payload_bytes'])


def summarize_variants(summary: pd.DataFrame):
    """Mean and standard deviation over seeds for every variant"""
    metrics = ['final_accuracy', 'smoothed_accuracy', 'mean_d_fa_sq', 'mean_d_fs_sq', 'odd_label_share']
    grouped = summary.groupby('variant', sort=False)[metrics].agg(['mean', 'std'])
    grouped.columns = [f'{metric}_{stat}' for metric, stat in grouped.columns]
    return grouped.reset_index()
