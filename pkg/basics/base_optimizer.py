from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from utils.errors import DimensionError, InvalidInputError, NumericError


@dataclass
class OptimizerConfig:
    kind: str = 'adam'
    lr: float = 0.01
    alpha: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    rho: float = 0.95

    def __post_init__(self):
        if self.lr < 0.:
            raise InvalidInputError(f'lr must be non-negative, got {self.lr}.')
        if self.alpha <= 0. or self.eps <= 0.:
            raise InvalidInputError(f'alpha and eps must be positive, got {self.alpha} and {self.eps}.')
        for name in ('beta1', 'beta2', 'rho'):
            value = getattr(self, name)
            if not 0. <= value < 1.:
                raise InvalidInputError(f'{name} must be in [0, 1), got {value}.')


@dataclass
class OptimizerState:
    """
    Auxiliary arrays of an optimizer, one list entry per parameter array.
    t counts the steps taken so far.
    """
    t: int = 0
    slots: Dict[str, List[np.ndarray]] = field(default_factory=dict)


class BaseOptimizer:
    """
        Base class for parameter-update rules.
        *step* checks that gradients match the parameters and are finite, creates the
        auxiliary arrays on the first call, increments the step counter and then
        updates every parameter array in place.

        Subclasses should define:
        1. *slot_names*:
            names of the per-parameter auxiliary arrays (zero-initialized);
        2. *update*:
            the elementwise rule for one parameter array and its slots.
    """
    slot_names: Sequence[str] = ()

    def __init__(self, config: OptimizerConfig):
        self.config = config

    def init_state(self, params: Sequence[np.ndarray]) -> OptimizerState:
        return OptimizerState(t=0, slots={
            name: [np.zeros_like(p, dtype=np.float64) for p in params] for name in self.slot_names
        })

    def update(self, param: np.ndarray, grad: np.ndarray, slots: Dict[str, np.ndarray], t: int):
        raise NotImplementedError()

    def step(self, state: OptimizerState, params: Sequence[np.ndarray],
             grads: Sequence[np.ndarray]) -> OptimizerState:
        if len(params) != len(grads):
            raise DimensionError(f'Got {len(grads)} gradient arrays for {len(params)} parameters.')
        for i, (p, g) in enumerate(zip(params, grads)):
            if p.shape != g.shape:
                raise DimensionError(f'Gradient {i} has shape {g.shape}, parameter has {p.shape}.')
            if not np.all(np.isfinite(g)):
                raise NumericError(f'Gradient {i} contains non-finite entries.')
        if any(name not in state.slots for name in self.slot_names):
            state.slots.update(self.init_state(params).slots)
        for name in self.slot_names:
            if [s.shape for s in state.slots[name]] != [p.shape for p in params]:
                raise DimensionError(f'Optimizer state \'{name}\' does not belong to these parameters.')

        state.t += 1
        for i, (p, g) in enumerate(zip(params, grads)):
            slots = {name: state.slots[name][i] for name in self.slot_names}
            self.update(p, np.asarray(g, dtype=np.float64), slots, state.t)
        return state
