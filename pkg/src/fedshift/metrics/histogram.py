import numpy as np

from fedshift.exceptions import ConfigurationError
from fedshift.model.params import LayeredParams


def weight_histogram(p: LayeredParams, bins: int):
    """
    Equal-width histogram of every layer over its own [min, max]

    :return: dict of layer -> (bin_edges, counts)
    """
    if bins < 2:
        raise ConfigurationError(f'bins must be >= 2, received {bins}')
    histograms = {}
    for name, values in p:
        values = values.astype(np.float64)
        if values.size == 0:
            histograms[name] = (np.zeros(bins + 1), np.zeros(bins, dtype=np.int64))
            continue
        counts, edges = np.histogram(values, bins=bins, range=(values.min(), values.max()))
        histograms[name] = (edges, counts.astype(np.int64))
    return histograms
