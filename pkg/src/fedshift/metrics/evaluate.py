import numpy as np

from fedshift.model.dataset import Dataset
from fedshift.model.network import ModelSpec, predict_logits
from fedshift.model.params import LayeredParams


def evaluate(global_params: LayeredParams, spec: ModelSpec, test: Dataset):
    """
    Top-1 accuracy, mean cross-entropy and predicted-label counts

    :return: (float, float, np.ndarray)
    """
    logits = predict_logits(global_params, spec, test.features)
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss = float(-log_probs[np.arange(test.num_samples), test.labels].mean())
    predictions = np.argmax(logits, axis=1)
    accuracy = float(np.mean(predictions == test.labels))
    counts = np.bincount(predictions, minlength=spec.num_classes).astype(np.int64)
    return accuracy, loss, counts


def label_group_share(prediction_counts, parity=1):
    """
    Share of predictions falling on odd (parity=1) or even (parity=0) labels

    Under the shard partition odd labels belong to the inferior group.
    """
    counts = np.asarray(prediction_counts, dtype=np.float64)
    total = counts.sum()
    if total == 0:
        return 0.0
    return float(counts[parity::2].sum() / total)
