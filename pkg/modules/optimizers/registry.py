from basics.base_optimizer import BaseOptimizer, OptimizerConfig
from utils.errors import UnknownOptimizerError

OPTIMIZERS = {}


def register_optimizer(kind):
    def wrapper(cls):
        OPTIMIZERS[kind] = cls
        return cls

    return wrapper


def get_optimizer_cls(kind: str):
    if kind not in OPTIMIZERS:
        raise UnknownOptimizerError(
            f'Unknown optimizer \'{kind}\'. Available optimizers: {", ".join(sorted(OPTIMIZERS))}.'
        )
    return OPTIMIZERS[kind]


def build_optimizer(config: OptimizerConfig) -> BaseOptimizer:
    return get_optimizer_cls(config.kind)(config)
