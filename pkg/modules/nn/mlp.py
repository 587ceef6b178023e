"""
    Three dense layers with ReLU and inverted dropout after the two hidden layers:

        logits = l3(drop(relu(l2(drop(relu(l1(x)))))))

    Forward keeps every intermediate value in a ForwardTrace so that backward can
    apply the same dropout masks and ReLU gates.
"""
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from basics.base_url_source import BENIGN, MALICIOUS
from modules.losses.softmax_ce import softmax
from modules.nn.layers import DenseLayer, dropout_mask, relu, relu_grad
from utils.errors import DimensionError, InvalidInputError

TRAIN = 'train'
EVAL = 'eval'


class MlpModel:
    def __init__(self, l1: DenseLayer, l2: DenseLayer, l3: DenseLayer, dropout_ratio: float = 0.75):
        if not 0. <= dropout_ratio < 1.:
            raise InvalidInputError(f'Dropout ratio must be in [0, 1), got {dropout_ratio}.')
        if l2.in_dim != l1.out_dim or l3.in_dim != l2.out_dim:
            raise DimensionError(
                f'Layer chain does not compose: {l1.in_dim}->{l1.out_dim}, '
                f'{l2.in_dim}->{l2.out_dim}, {l3.in_dim}->{l3.out_dim}.'
            )
        self.l1 = l1
        self.l2 = l2
        self.l3 = l3
        self.dropout_ratio = float(dropout_ratio)

    @property
    def layers(self) -> List[DenseLayer]:
        return [self.l1, self.l2, self.l3]

    @property
    def dims(self) -> Tuple[int, int, int, int]:
        return self.l1.in_dim, self.l1.out_dim, self.l2.out_dim, self.l3.out_dim

    @property
    def input_size(self) -> int:
        return self.l1.in_dim

    def parameters(self) -> List[np.ndarray]:
        """Parameter arrays in the fixed order W1, b1, W2, b2, W3, b3 (the arrays themselves, not copies)."""
        params = []
        for layer in self.layers:
            params += [layer.weights, layer.bias]
        return params

    def copy(self) -> 'MlpModel':
        return MlpModel(self.l1.copy(), self.l2.copy(), self.l3.copy(), self.dropout_ratio)

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.parameters())

    def __repr__(self):
        return f'MlpModel(dims={self.dims}, dropout_ratio={self.dropout_ratio})'


class ForwardTrace(NamedTuple):
    x: np.ndarray
    z1: np.ndarray
    a1: np.ndarray
    mask1: np.ndarray
    z2: np.ndarray
    a2: np.ndarray
    mask2: np.ndarray
    logits: np.ndarray
    mode: str

    @property
    def h1(self) -> np.ndarray:
        return self.a1 * self.mask1

    @property
    def h2(self) -> np.ndarray:
        return self.a2 * self.mask2


class Gradients(NamedTuple):
    dW1: np.ndarray
    db1: np.ndarray
    dW2: np.ndarray
    db2: np.ndarray
    dW3: np.ndarray
    db3: np.ndarray

    def arrays(self) -> List[np.ndarray]:
        return list(self)


def init_model(seed: int, input_size: int = 512, hidden_size: int = 256, num_classes: int = 2,
               dropout_ratio: float = 0.75) -> MlpModel:
    rng = np.random.default_rng(seed)
    return MlpModel(
        DenseLayer.gaussian(hidden_size, input_size, rng),
        DenseLayer.gaussian(hidden_size, hidden_size, rng),
        DenseLayer.gaussian(num_classes, hidden_size, rng),
        dropout_ratio=dropout_ratio
    )


def zero_model(input_size: int = 512, hidden_size: int = 256, num_classes: int = 2,
               dropout_ratio: float = 0.75) -> MlpModel:
    return MlpModel(
        DenseLayer.zeros(hidden_size, input_size),
        DenseLayer.zeros(hidden_size, hidden_size),
        DenseLayer.zeros(num_classes, hidden_size),
        dropout_ratio=dropout_ratio
    )


def forward(model: MlpModel, batch: np.ndarray, mode: str = EVAL,
            rng: Optional[np.random.Generator] = None) -> ForwardTrace:
    """
    :param batch: [B, input_size]
    :param mode: 'train' applies dropout drawn from rng, 'eval' disables it
    """
    if mode not in (TRAIN, EVAL):
        raise InvalidInputError(f'Unknown forward mode \'{mode}\'.')
    if mode == TRAIN and rng is None:
        raise InvalidInputError('Train-mode forward needs a random stream for dropout.')
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.input_size:
        raise DimensionError(f'Expected a batch of shape [B, {model.input_size}], got {x.shape}.')
    drop_rng = rng if mode == TRAIN else None

    z1 = model.l1(x)
    a1 = relu(z1)
    mask1 = dropout_mask(a1.shape, model.dropout_ratio, drop_rng)
    z2 = model.l2(a1 * mask1)
    a2 = relu(z2)
    mask2 = dropout_mask(a2.shape, model.dropout_ratio, drop_rng)
    logits = model.l3(a2 * mask2)
    return ForwardTrace(x=x, z1=z1, a1=a1, mask1=mask1, z2=z2, a2=a2, mask2=mask2, logits=logits, mode=mode)


def backward(model: MlpModel, trace: ForwardTrace, dlogits: np.ndarray) -> Gradients:
    dlogits = np.asarray(dlogits, dtype=np.float64)
    batch = trace.x.shape[0]
    if trace.x.shape[1] != model.input_size or trace.z1.shape != (batch, model.l1.out_dim) \
            or trace.z2.shape != (batch, model.l2.out_dim):
        raise DimensionError('Forward trace does not belong to this model.')
    if dlogits.shape != (batch, model.l3.out_dim):
        raise DimensionError(f'Expected dlogits of shape {(batch, model.l3.out_dim)}, got {dlogits.shape}.')

    h1 = trace.h1
    h2 = trace.h2

    dW3 = dlogits.T @ h2
    db3 = dlogits.sum(axis=0)
    dz2 = (dlogits @ model.l3.weights) * trace.mask2 * relu_grad(trace.z2)
    dW2 = dz2.T @ h1
    db2 = dz2.sum(axis=0)
    dz1 = (dz2 @ model.l2.weights) * trace.mask1 * relu_grad(trace.z1)
    dW1 = dz1.T @ trace.x
    db1 = dz1.sum(axis=0)
    return Gradients(dW1=dW1, db1=db1, dW2=dW2, db2=db2, dW3=dW3, db3=db3)


def predict_logits(model: MlpModel, vectors: np.ndarray) -> np.ndarray:
    return forward(model, np.atleast_2d(vectors), mode=EVAL).logits


def predict_proba_batch(model: MlpModel, vectors: np.ndarray) -> np.ndarray:
    """
    :return: [B, 2] class probabilities, column 0 benign, column 1 malicious

    Values lie in the closed interval [0, 1]: in float64 a logit gap above ~37 already
    rounds the larger probability to 1.0. They are left unclipped so ranking is kept.
    """
    return softmax(predict_logits(model, vectors))


def predict_proba(model: MlpModel, vector: np.ndarray) -> Tuple[float, float]:
    probs = predict_proba_batch(model, np.asarray(vector, dtype=np.float64).reshape(1, -1))[0]
    return float(probs[BENIGN]), float(probs[MALICIOUS])


def predict_labels(logits: np.ndarray) -> np.ndarray:
    # argmax picks the first maximum, so equal logits resolve to benign
    return np.argmax(logits, axis=1).astype(np.int64)
