from typing import Sequence, Tuple

import numpy as np

from basics.base_optimizer import BaseOptimizer, OptimizerConfig, OptimizerState
from modules.optimizers.registry import OPTIMIZERS, build_optimizer, get_optimizer_cls, register_optimizer
from modules.optimizers.adadelta import AdaDelta
from modules.optimizers.adam import Adam
from modules.optimizers.sgd import SGD
from utils.errors import UnknownOptimizerError

OPTIMIZER_KINDS = ('adam', 'adadelta', 'sgd')


def default_config(kind: str) -> OptimizerConfig:
    if kind == 'sgd':
        return OptimizerConfig(kind='sgd', lr=0.01)
    if kind == 'adam':
        return OptimizerConfig(kind='adam', alpha=0.001, beta1=0.9, beta2=0.999, eps=1e-8)
    if kind == 'adadelta':
        return OptimizerConfig(kind='adadelta', rho=0.95, eps=1e-6)
    raise UnknownOptimizerError(f'Unknown optimizer \'{kind}\'. Choose from {", ".join(OPTIMIZER_KINDS)}.')


def config_from_hparams(optimizer_hparams: dict, kind: str = None, **overrides) -> OptimizerConfig:
    """
    Build a config from the ``optimizer`` section of the hparams: defaults for the kind,
    then the kind's sub-section, then explicit (non-None) overrides such as CLI flags.
    """
    kind = kind or optimizer_hparams.get('kind', 'adam')
    values = vars(default_config(kind)).copy()
    values.update(optimizer_hparams.get(kind) or {})
    values.update({k: v for k, v in overrides.items() if v is not None})
    values['kind'] = kind
    return OptimizerConfig(**values)


def step(config: OptimizerConfig, state: OptimizerState, params: Sequence[np.ndarray],
         grads: Sequence[np.ndarray]) -> Tuple[Sequence[np.ndarray], OptimizerState]:
    """Update params in place with the rule named by config.kind and return (params, state)."""
    state = build_optimizer(config).step(state, params, grads)
    return params, state
