import attr
import numpy as np

from fedshift.exceptions import ConfigurationError


def _features(value):
    array = np.asarray(value, dtype=np.float64)
    if array.ndim != 2:
        raise ConfigurationError(f'features must be a matrix, received shape {array.shape}')
    return array


def _labels(value):
    return np.asarray(value, dtype=np.int64).reshape(-1)


@attr.define(kw_only=True, frozen=True, eq=False)
class Dataset:
    features: np.ndarray = attr.ib(converter=_features)
    labels: np.ndarray = attr.ib(converter=_labels)

    @labels.validator
    def _check_rows(self, attribute, value):
        if value.shape[0] != self.features.shape[0]:
            raise ConfigurationError(f'features have {self.features.shape[0]} rows '
                                     f'but labels have {value.shape[0]} entries')

    @property
    def num_samples(self):
        return int(self.labels.shape[0])

    @property
    def input_dim(self):
        return int(self.features.shape[1])

    @property
    def num_classes(self):
        if self.num_samples == 0:
            return 0
        return int(self.labels.max()) + 1

    def subset(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(features=self.features[indices], labels=self.labels[indices])

    def batches(self, batch_size, rng=None):
        """
        Yield mini-batches, shuffled when an rng is given

        :param batch_size: int
        :param rng: np.random.Generator | None
        :return: generator of Dataset
        """
        order = np.arange(self.num_samples) if rng is None else rng.permutation(self.num_samples)
        for start in range(0, self.num_samples, batch_size):
            yield self.subset(order[start:start + batch_size])
