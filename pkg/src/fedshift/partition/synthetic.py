import numpy as np

from fedshift.exceptions import ConfigurationError
from fedshift.model.dataset import Dataset


def _class_means(rng, num_classes, input_dim, class_separation):
    if class_separation == 0:
        return np.zeros((num_classes, input_dim))
    if input_dim >= num_classes:
        # scaled simplex: one-hot corners at pairwise distance exactly class_separation,
        # then a random rotation so the classes do not line up with the axes
        corners = np.eye(num_classes, input_dim) * (class_separation / np.sqrt(2.0))
        rotation, _ = np.linalg.qr(rng.normal(size=(input_dim, input_dim)))
        return corners @ rotation
    directions = rng.normal(size=(num_classes, input_dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    gaps = np.linalg.norm(directions[:, None, :] - directions[None, :, :], axis=2)
    closest = gaps[~np.eye(num_classes, dtype=bool)].min()
    if closest == 0:
        raise ConfigurationError(f'cannot place {num_classes} separated classes in {input_dim} dimensions')
    return directions * (class_separation / closest)


def synth_dataset(num_classes: int, samples_per_class: int, input_dim: int, class_separation: float,
                  seed: int) -> Dataset:
    """
    Gaussian blobs with unit within-class variance

    Class means are at least ``class_separation`` apart. Rows are shuffled.

    :return: Dataset
    """
    for name, value in (('num_classes', num_classes), ('samples_per_class', samples_per_class),
                        ('input_dim', input_dim)):
        if int(value) < 1:
            raise ConfigurationError(f'{name} must be positive, received {value}')
    if class_separation < 0:
        raise ConfigurationError(f'class_separation must be non-negative, received {class_separation}')
    rng = np.random.default_rng(seed)
    means = _class_means(rng, num_classes, input_dim, class_separation)
    labels = np.repeat(np.arange(num_classes), samples_per_class)
    features = means[labels] + rng.normal(size=(labels.size, input_dim))
    order = rng.permutation(labels.size)
    return Dataset(features=features[order], labels=labels[order])


def split_dataset(data: Dataset, test_fraction: float, seed: int):
    """
    Stratified train/test split

    Each class contributes round(test_fraction * class size) samples to the test set.

    :return: (Dataset, Dataset)
    """
    if not 0 <= test_fraction < 1:
        raise ConfigurationError(f'test_fraction must lie in [0, 1), received {test_fraction}')
    rng = np.random.default_rng(seed)
    train, test = [], []
    for label in np.unique(data.labels):
        members = rng.permutation(np.flatnonzero(data.labels == label))
        cut = int(np.floor(test_fraction * members.size + 0.5))
        test.append(members[:cut])
        train.append(members[cut:])
    train_idx = np.sort(np.concatenate(train))
    test_idx = np.sort(np.concatenate(test))
    return data.subset(train_idx), data.subset(test_idx)
