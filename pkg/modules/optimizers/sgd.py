from basics.base_optimizer import BaseOptimizer
from modules.optimizers.registry import register_optimizer


@register_optimizer('sgd')
class SGD(BaseOptimizer):
    def update(self, param, grad, slots, t):
        param -= self.config.lr * grad
