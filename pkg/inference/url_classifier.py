from typing import Optional, Tuple

import numpy as np

from basics.base_url_source import BENIGN, LABEL_NAMES, MALICIOUS, Dataset
from inference.metrics import DEFAULT_THRESHOLD
from modules.nn.mlp import MlpModel, predict_proba, predict_proba_batch
from modules.vectorizers.bag_of_bytes import BagOfBytesVectorizer, vectorize
from utils import model_io
from utils.errors import DatasetError


class UrlClassifier:
    """
        Scores URLs with a trained model.
        1. *predict*:
            (p_benign, p_malicious) for one URL;
        2. *verdict*:
            'malicious' iff p_malicious > threshold, otherwise 'benign';
        3. *score_dataset*:
            p_malicious for every entry of a labeled dataset, in order.
    """

    def __init__(self, model: MlpModel, threshold: float = DEFAULT_THRESHOLD,
                 vectorizer: Optional[BagOfBytesVectorizer] = None):
        self.model = model
        self.threshold = threshold
        self.vectorizer = vectorizer or BagOfBytesVectorizer()

    @classmethod
    def from_file(cls, path, allow_any_dims: bool = False, **kwargs) -> 'UrlClassifier':
        return cls(model_io.load(path, allow_any_dims=allow_any_dims), **kwargs)

    def predict(self, url) -> Tuple[float, float]:
        return predict_proba(self.model, vectorize(url))

    def verdict(self, p_malicious: float) -> str:
        return LABEL_NAMES[MALICIOUS] if p_malicious > self.threshold else LABEL_NAMES[BENIGN]

    def score_dataset(self, d: Dataset) -> Tuple[np.ndarray, np.ndarray]:
        """:return: (p_malicious [N], labels [N])"""
        if len(d) == 0:
            raise DatasetError(f'Dataset \'{d.provenance}\' is empty.')
        probs = predict_proba_batch(self.model, self.vectorizer.transform(d.urls))[:, MALICIOUS]
        return probs, np.asarray(d.labels, dtype=np.int64)
