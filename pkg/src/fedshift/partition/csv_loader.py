import numpy as np
import pandas as pd

from fedshift.common.logger import get_logger
from fedshift.exceptions import DataError, OutputError
from fedshift.model.dataset import Dataset

logger = get_logger(__name__)

STD_FLOOR = 1e-12

# the header is line 1, so data row i sits on line i + 2
_FIRST_DATA_LINE = 2


def _first_bad_row(mask):
    return int(np.flatnonzero(mask.to_numpy())[0]) + _FIRST_DATA_LINE


def standardize(features):
    """Zero mean, unit variance per column; constant columns become zeros"""
    features = np.asarray(features, dtype=np.float64)
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    safe = np.where(std < STD_FLOOR, 1.0, std)
    out = (features - mean) / safe
    out[:, std < STD_FLOOR] = 0.0
    return out


def load_csv_dataset(path, label_column: str) -> Dataset:
    """
    Load a header-first, comma-separated UTF-8 table

    Every column other than ``label_column`` is a numeric feature.

    :param path: str
    :param label_column: str
    :return: Dataset
    """
    try:
        df = pd.read_csv(path, sep=',', encoding='utf-8', dtype=str, keep_default_na=False)
    except FileNotFoundError as e:
        raise OutputError(f'cannot read dataset: {e}', path=str(path))
    except pd.errors.ParserError as e:
        # pandas reports "... in line N" for ragged rows
        raise DataError(f'cannot parse dataset: {e}', path=str(path))
    except UnicodeDecodeError as e:
        raise DataError(f'dataset is not utf-8: {e}', path=str(path))

    if label_column not in df.columns:
        raise DataError(f'label column {label_column!r} not found; columns: {", ".join(df.columns)}',
                        path=str(path))
    if len(df.index) == 0:
        raise DataError('dataset has no rows', path=str(path))

    raw_labels = df[label_column].str.strip()
    labels = pd.to_numeric(raw_labels, errors='coerce')
    bad = labels.isna() | (labels != labels.round()) | (labels < 0)
    if bad.any():
        line = _first_bad_row(bad)
        raise DataError(f'label {raw_labels.iloc[line - _FIRST_DATA_LINE]!r} is not a non-negative integer',
                        path=str(path), line=line)

    feature_columns = [c for c in df.columns if c != label_column]
    columns = []
    for column in feature_columns:
        values = pd.to_numeric(df[column].str.strip(), errors='coerce')
        bad = values.isna() | ~np.isfinite(values.fillna(0.0))
        if bad.any():
            line = _first_bad_row(bad)
            raise DataError(f'column {column!r} has non-numeric value '
                            f'{df[column].iloc[line - _FIRST_DATA_LINE]!r}', path=str(path), line=line)
        columns.append(values.to_numpy(dtype=np.float64))

    features = np.column_stack(columns) if columns else np.zeros((len(df.index), 0))
    logger.info(f'Loaded {len(df.index)} rows with {len(feature_columns)} features from {path}')
    return Dataset(features=standardize(features), labels=labels.to_numpy(dtype=np.int64))


def write_csv_dataset(data: Dataset, path, label_column='label'):
    df = pd.DataFrame(data.features, columns=[f'x{i}' for i in range(data.input_dim)])
    df[label_column] = data.labels
    try:
        df.to_csv(path, index=False, float_format='%.17g')
    except OSError as e:
        raise OutputError(f'cannot write dataset: {e}', path=str(path))
