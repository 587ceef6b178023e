import numpy as np

from basics.base_optimizer import BaseOptimizer
from modules.optimizers.registry import register_optimizer


@register_optimizer('adadelta')
class AdaDelta(BaseOptimizer):
    slot_names = ('sq_grad', 'sq_delta')

    def update(self, param, grad, slots, t):
        rho, eps = self.config.rho, self.config.eps
        sq_grad, sq_delta = slots['sq_grad'], slots['sq_delta']
        sq_grad *= rho
        sq_grad += (1. - rho) * grad ** 2
        delta = -np.sqrt(sq_delta + eps) / np.sqrt(sq_grad + eps) * grad
        sq_delta *= rho
        sq_delta += (1. - rho) * delta ** 2
        param += delta
