"""
Parameter update rules.
"""
from typing import Dict

import numpy as np

from src.core.errors import ConfigError
from src.models.network import TrainConfig


class SGD:
    """Plain gradient descent."""

    def __init__(self, learning_rate: float) -> None:
        self.learning_rate = learning_rate

    def step(self, parameters: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        for name, value in parameters.items():
            value -= (self.learning_rate * grads[name]).astype(value.dtype)


class Adam:
    """Adam with bias correction folded into the step size."""

    def __init__(
        self,
        learning_rate: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-7,
    ) -> None:
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.iterations = 0
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}

    def step(self, parameters: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        self.iterations += 1
        t = self.iterations
        step_size = self.learning_rate * np.sqrt(1.0 - self.beta2 ** t) / (1.0 - self.beta1 ** t)
        for name, value in parameters.items():
            g = grads[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(value)
                self.v[name] = np.zeros_like(value)
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * g * g
            update = step_size * self.m[name] / (np.sqrt(self.v[name]) + self.epsilon)
            value -= update.astype(value.dtype)


def build_optimizer(config: TrainConfig):
    """Optimizer named by the training configuration."""
    if config.optimizer == 'adam':
        return Adam(config.learning_rate, config.beta1, config.beta2, config.epsilon)
    if config.optimizer == 'sgd':
        return SGD(config.learning_rate)
    raise ConfigError(f"Unknown optimizer {config.optimizer!r}")
