from typing import Optional

import numpy as np

from utils.errors import DimensionError


class DenseLayer:
    """
    Affine map y = x @ weights.T + bias.
    weights: [out_dim, in_dim], bias: [out_dim]
    """

    def __init__(self, weights: np.ndarray, bias: np.ndarray):
        weights = np.asarray(weights, dtype=np.float64)
        bias = np.asarray(bias, dtype=np.float64)
        if weights.ndim != 2 or bias.shape != (weights.shape[0],):
            raise DimensionError(
                f'Dense layer needs weights [out, in] and bias [out], got {weights.shape} and {bias.shape}.'
            )
        self.weights = weights
        self.bias = bias

    @classmethod
    def zeros(cls, out_dim: int, in_dim: int) -> 'DenseLayer':
        return cls(np.zeros((out_dim, in_dim)), np.zeros(out_dim))

    @classmethod
    def gaussian(cls, out_dim: int, in_dim: int, rng: np.random.Generator) -> 'DenseLayer':
        # std 1/sqrt(fan_in), zero bias
        return cls(rng.normal(0., 1. / np.sqrt(in_dim), size=(out_dim, in_dim)), np.zeros(out_dim))

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise DimensionError(f'Dense layer expects input [batch, {self.in_dim}], got {x.shape}.')
        return x @ self.weights.T + self.bias

    def copy(self) -> 'DenseLayer':
        return DenseLayer(self.weights.copy(), self.bias.copy())

    def __repr__(self):
        return f'DenseLayer(out={self.out_dim}, in={self.in_dim})'


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.)


def relu_grad(pre_activation: np.ndarray) -> np.ndarray:
    # subgradient at exactly 0 is 0
    return (pre_activation > 0.).astype(np.float64)


def dropout_mask(shape, ratio: float, rng: Optional[np.random.Generator]) -> np.ndarray:
    """
    Inverted dropout: each unit is dropped with probability ``ratio`` and the
    survivors are scaled by 1 / (1 - ratio). Without an rng (eval mode) or with
    ratio 0 the mask is the identity.
    """
    if rng is None or ratio == 0.:
        return np.ones(shape, dtype=np.float64)
    keep = rng.random(shape) >= ratio
    return keep.astype(np.float64) / (1. - ratio)
