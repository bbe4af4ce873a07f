import os

import pandas as pd

from fedshift.common.logger import get_logger
from fedshift.exceptions import OutputError

logger = get_logger(__name__)

FLOAT_FORMAT = '%.9g'

LEADING_COLUMNS = ['seed', 'round', 'test_accuracy', 'test_loss', 'train_loss']
GROUP_METRICS = ['d_fa_sq', 'd_fs_sq', 'theorem2_residual', 'm_curr']
TRAILING_COLUMNS = ['client_drift', 'num_inferior', 'payload_bytes_total']
COUNT_PREFIX = 'pred_count_'


def csv_columns(groups=(), num_classes=0):
    columns = list(LEADING_COLUMNS)
    for group in groups:
        columns += [f'{metric}_{group}' for metric in GROUP_METRICS]
    columns += TRAILING_COLUMNS
    columns += [f'{COUNT_PREFIX}{c}' for c in range(num_classes)]
    return columns


def record_row(record):
    row = {column: getattr(record, column) for column in LEADING_COLUMNS + TRAILING_COLUMNS}
    for metric in GROUP_METRICS:
        for group, value in getattr(record, metric).items():
            row[f'{metric}_{group}'] = value
    for c, count in enumerate(record.prediction_counts):
        row[f'{COUNT_PREFIX}{c}'] = int(count)
    return row


def records_frame(records):
    """
    One row per (seed, round) with a fixed column order

    Group columns follow the layer order of the first record.
    """
    if not records:
        return pd.DataFrame(columns=csv_columns())
    first = records[0]
    columns = csv_columns(first.groups, len(first.prediction_counts))
    rows = [record_row(record) for record in sorted(records, key=lambda r: (r.seed, r.round))]
    return pd.DataFrame(rows, columns=columns)


def emit_csv(records, path):
    """
    Write round records as CSV, reals with 9 significant digits

    :param records: list of RoundRecord
    :param path: str
    :raises OutputError: when the file cannot be written
    """
    frame = records_frame(records)
    try:
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    except OSError as e:
        raise OutputError(f'cannot write records: {e}', path=str(path))
    logger.debug(f'Wrote {len(frame)} records to {path}')


def emit_summary(summary: pd.DataFrame, path):
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        summary.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    except OSError as e:
        raise OutputError(f'cannot write summary: {e}', path=str(path))
