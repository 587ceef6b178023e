from typing import Tuple

import numpy as np

from utils.errors import DimensionError, InvalidInputError


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def check_labels(labels, num_classes: int = 2) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise DimensionError(f'Labels must be a 1-D array, got shape {labels.shape}.')
    if labels.size and not np.all(np.isin(labels, np.arange(num_classes))):
        bad = labels[~np.isin(labels, np.arange(num_classes))][0]
        raise InvalidInputError(f'Invalid label {bad!r}; labels must be in [0, {num_classes - 1}].')
    return labels.astype(np.int64)


def softmax_cross_entropy(logits: np.ndarray, labels) -> Tuple[float, np.ndarray]:
    """
    :param logits: [B, C]
    :param labels: [B] class indices
    :return: mean negative log-likelihood, and its gradient w.r.t. logits ([B, C])
    """
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 2:
        raise DimensionError(f'Logits must be [batch, classes], got {logits.shape}.')
    labels = check_labels(labels, logits.shape[1])
    batch = logits.shape[0]
    if batch == 0 or labels.shape[0] != batch:
        raise DimensionError(f'Got {batch} logit rows but {labels.shape[0]} labels.')

    log_probs = log_softmax(logits)
    rows = np.arange(batch)
    loss = float(-log_probs[rows, labels].mean())

    dlogits = np.exp(log_probs)
    dlogits[rows, labels] -= 1.
    dlogits /= batch
    return loss, dlogits
