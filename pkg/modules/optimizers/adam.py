import numpy as np

from basics.base_optimizer import BaseOptimizer
from modules.optimizers.registry import register_optimizer


@register_optimizer('adam')
class Adam(BaseOptimizer):
    """Adam with bias-corrected first and second moments."""
    slot_names = ('m', 'v')

    def update(self, param, grad, slots, t):
        cfg = self.config
        m, v = slots['m'], slots['v']
        m *= cfg.beta1
        m += (1. - cfg.beta1) * grad
        v *= cfg.beta2
        v += (1. - cfg.beta2) * grad ** 2
        m_hat = m / (1. - cfg.beta1 ** t)
        v_hat = v / (1. - cfg.beta2 ** t)
        param -= cfg.alpha * m_hat / (np.sqrt(v_hat) + cfg.eps)
