"""
Layer primitives with hand-derived gradients.

Every *_forward returns (output, cache) and the matching *_backward takes
the upstream gradient and that cache. Spatial tensors are (B, 3, 3, C).
"""
from typing import Optional, Tuple

import numpy as np

from config.settings import BN_EPSILON, BN_MOMENTUM
from src.core.errors import BatchSizeError, ConfigError, LabelError, ShapeError
from src.utils.validators import validate_rate

NORM_FLOOR = 1e-12


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape: Tuple[int, ...]) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def conv1x1_forward(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray):
    """Channel mixing at every spatial position."""
    return x @ kernel + bias, x


def conv1x1_backward(dy: np.ndarray, x: np.ndarray, kernel: np.ndarray):
    """Returns (dx, dkernel, dbias)."""
    cin, cout = kernel.shape
    dkernel = x.reshape(-1, cin).T @ dy.reshape(-1, cout)
    dbias = dy.reshape(-1, cout).sum(axis=0)
    return dy @ kernel.T, dkernel, dbias


def dense_forward(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray):
    return x @ kernel + bias, x


def dense_backward(dy: np.ndarray, x: np.ndarray, kernel: np.ndarray):
    """Returns (dx, dkernel, dbias)."""
    return dy @ kernel.T, x.T @ dy, dy.sum(axis=0)


def relu_forward(z: np.ndarray):
    mask = z > 0
    return z * mask, mask


def relu_backward(dy: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return dy * mask


def dropout_noise(shape: Tuple[int, ...], rate: float, rng: np.random.Generator, dtype=np.float64) -> np.ndarray:
    """Multiplicative noise with mean 1 and variance rate / (1 - rate)."""
    rate = validate_rate(rate)
    if rate == 0.0:
        return np.ones(shape, dtype=dtype)
    sigma = np.sqrt(rate / (1.0 - rate))
    return (1.0 + sigma * rng.standard_normal(shape)).astype(dtype)


def gaussian_dropout(
    activations: np.ndarray,
    rate: float = 0.3,
    rng: Optional[np.random.Generator] = None,
    mode: str = 'train',
) -> np.ndarray:
    """
    Gaussian dropout.

    Args:
        activations: Input activations
        rate: Dropout rate in [0, 1)
        rng: Noise generator, required in train mode when rate > 0
        mode: 'train' multiplies by noise, 'eval' is the identity

    Returns:
        Activations
    """
    rate = validate_rate(rate)
    if mode != 'train' or rate == 0.0:
        return activations
    if rng is None:
        raise ConfigError("A random generator is required for training-mode dropout")
    return activations * dropout_noise(activations.shape, rate, rng, activations.dtype)


def batchnorm_forward(
    x: np.ndarray,
    gamma: np.ndarray,
    beta: np.ndarray,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    mode: str = 'train',
    momentum: float = BN_MOMENTUM,
    eps: float = BN_EPSILON,
    update_stats: bool = True,
):
    """
    Batch normalization over every axis but the last.

    In train mode batch statistics are used and, when update_stats is set,
    running_mean/running_var are updated in place with the biased batch
    variance. In eval mode the running statistics are used.

    Returns:
        (output, cache)
    """
    axes = tuple(range(x.ndim - 1))
    if mode == 'train':
        if x.shape[0] < 2:
            raise BatchSizeError(f"Batch normalization needs at least 2 samples in train mode, got {x.shape[0]}")
        mean = x.mean(axis=axes)
        var = x.var(axis=axes)
        if update_stats:
            running_mean *= momentum
            running_mean += (1.0 - momentum) * mean
            running_var *= momentum
            running_var += (1.0 - momentum) * var
    else:
        mean, var = running_mean, running_var
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x - mean) * inv_std
    return gamma * xhat + beta, (xhat, inv_std)


def batchnorm_backward(dy: np.ndarray, cache, gamma: np.ndarray):
    """Train-mode gradient through the batch statistics; returns (dx, dgamma, dbeta)."""
    xhat, inv_std = cache
    axes = tuple(range(dy.ndim - 1))
    m = dy.size // dy.shape[-1]
    dgamma = (dy * xhat).sum(axis=axes)
    dbeta = dy.sum(axis=axes)
    dxhat = dy * gamma
    dx = inv_std / m * (m * dxhat - dxhat.sum(axis=axes) - xhat * (dxhat * xhat).sum(axis=axes))
    return dx, dgamma, dbeta


def l2_normalize_forward(z: np.ndarray):
    norm = np.maximum(np.linalg.norm(z, axis=1, keepdims=True), NORM_FLOOR)
    e = z / norm
    return e, (e, norm)


def l2_normalize_backward(de: np.ndarray, cache) -> np.ndarray:
    e, norm = cache
    return (de - e * np.sum(e * de, axis=1, keepdims=True)) / norm


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def check_labels(labels: np.ndarray, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise LabelError(f"Labels must lie in [0, {num_classes}), got range [{labels.min()}, {labels.max()}]")
    return labels


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Mean categorical cross-entropy and its gradient w.r.t. the logits.

    Args:
        logits: (B, K) scores
        labels: (B,) class indices

    Returns:
        (loss, dlogits) with dlogits = (softmax - onehot) / B
    """
    if logits.ndim != 2 or len(logits) != len(labels):
        raise ShapeError(f"Logits {logits.shape} do not match {len(labels)} labels")
    labels = check_labels(labels, logits.shape[1])
    batch = len(labels)
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(batch)
    loss = float(np.mean(log_norm - shifted[rows, labels]))
    grad = np.exp(shifted - log_norm[:, None])
    grad[rows, labels] -= 1.0
    return loss, grad / batch

