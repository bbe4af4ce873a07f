"""
Layer-wise k-means codebook quantization (1-D Lloyd's algorithm).
"""
import numpy as np

from fedshift.common.logger import get_logger
from fedshift.exceptions import CorruptionError, DataError
from .types import KMeansCodebook, QuantizedLayer, check_bits
from .uniform import finite_vector

logger = get_logger(__name__)

DEFAULT_MAX_ITERS = 50
DEFAULT_TOL = 1e-6


def nearest_centroid(values, centroids):
    """
    Index of the nearest entry of a sorted centroid vector; ties go to the lower index

    :param values: np.ndarray
    :param centroids: np.ndarray, sorted ascending
    :return: np.ndarray of int64
    """
    values = np.asarray(values, dtype=np.float64)
    centroids = np.asarray(centroids, dtype=np.float64)
    top = centroids.size - 1
    upper = np.clip(np.searchsorted(centroids, values, side='left'), 0, top)
    lower = np.clip(upper - 1, 0, top)
    take_lower = np.abs(values - centroids[lower]) <= np.abs(values - centroids[upper])
    return np.where(take_lower, lower, upper)


def kmeans_fit(layer_values, bits: int, max_iters: int = DEFAULT_MAX_ITERS, tol: float = DEFAULT_TOL,
               seed: int = 0) -> KMeansCodebook:
    """
    Fit a 2^bits codebook with Lloyd's algorithm

    Centroids start at evenly spaced sample quantiles. Iteration stops once no centroid moves
    by more than ``tol`` times the data range, or after ``max_iters``. An empty cluster is
    re-seeded at the point farthest from its centroid. Empty clusters left at the end and
    duplicate centroids are dropped, so the codebook may hold fewer than 2^bits entries.

    :param layer_values: flat vector
    :param bits: int
    :param max_iters: int
    :param tol: float, relative to the data range
    :param seed: int, kept for a stable call signature; the quantile start needs no randomness
    :return: KMeansCodebook
    """
    bits = check_bits(bits)
    data = finite_vector(layer_values).astype(np.float64)
    if data.size == 0:
        raise DataError('cannot fit a codebook to an empty layer')
    k = 2 ** bits

    distinct = np.unique(data)
    if distinct.size <= k:
        return KMeansCodebook(centroids=np.unique(distinct.astype(np.float32)), bits=bits)

    centroids = np.quantile(data, np.linspace(0.0, 1.0, k))
    threshold = tol * (data.max() - data.min())
    previous = np.inf
    for iteration in range(max_iters):
        labels = nearest_centroid(data, centroids)
        errors = (data - centroids[labels]) ** 2
        objective = errors.sum()
        assert objective <= previous * (1 + 1e-12) + 1e-300, \
            f'k-means objective increased at iteration {iteration}: {previous} -> {objective}'
        previous = objective

        counts = np.bincount(labels, minlength=k)
        moved = centroids.copy()
        for empty in np.flatnonzero(counts == 0):
            farthest = int(np.argmax(errors))
            if errors[farthest] == 0:
                break
            logger.debug(f'reseeding empty cluster {empty} at {data[farthest]}')
            moved[empty] = data[farthest]
            labels[farthest] = empty
            errors[farthest] = 0.0

        counts = np.bincount(labels, minlength=k)
        sums = np.bincount(labels, weights=data, minlength=k)
        updated = np.where(counts > 0, sums / np.maximum(counts, 1), moved)
        updated.sort()
        shift = np.max(np.abs(updated - centroids))
        centroids = updated
        if shift < threshold:
            break

    used = np.unique(nearest_centroid(data, centroids))
    return KMeansCodebook(centroids=np.unique(centroids[used].astype(np.float32)), bits=bits)


def quant_kmeans(layer_values, codebook: KMeansCodebook, name: str = '') -> QuantizedLayer:
    values = finite_vector(layer_values)
    indices = nearest_centroid(values, codebook.array)
    return QuantizedLayer(name=name, indices=indices.astype(np.uint32), codec=codebook)


def dequant_kmeans(q: QuantizedLayer) -> np.ndarray:
    centroids = q.codec.array
    if q.size and int(q.indices.max()) >= centroids.size:
        raise CorruptionError(f'layer {q.name}: index {int(q.indices.max())} '
                              f'out of range for {centroids.size} centroids')
    return centroids[q.indices.astype(np.int64)]


def max_gap(codebook: KMeansCodebook) -> float:
    centroids = codebook.array.astype(np.float64)
    if centroids.size < 2:
        return 0.0
    return float(np.max(np.diff(centroids)))
