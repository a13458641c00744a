"""
Exact t-SNE.

Gaussian input affinities calibrated per point by bisection on the
precision, Student-t output affinities, and gradient descent on the KL
divergence with momentum, per-parameter gains and early exaggeration.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.spatial.distance import pdist, squareform

from config.settings import (
    DEFAULT_SEED,
    TSNE_EARLY_EXAGGERATION,
    TSNE_EXAGGERATION_ITERATIONS,
    TSNE_ITERATIONS,
    TSNE_LEARNING_RATE,
    TSNE_PERPLEXITY,
)
from src.core.errors import DataError, NumericError
from src.utils.validators import validate_positive

logger = logging.getLogger(__name__)

ENTROPY_TOLERANCE = 1e-5
MAX_BISECTION_STEPS = 50
INITIAL_SCALE = 1e-4
MIN_GAIN = 0.01
Q_FLOOR = 1e-12


@dataclass
class TsneResult:
    """2-D coordinates and the KL divergence recorded after every iteration."""

    coordinates: np.ndarray
    kl_divergence: np.ndarray


def _check_inputs(vectors: np.ndarray, perplexity: float) -> np.ndarray:
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2:
        raise DataError(f"Expected an (N, D) array, got shape {vectors.shape}")
    if not np.all(np.isfinite(vectors)):
        raise NumericError("t-SNE input contains non-finite values")
    if perplexity <= 0:
        raise DataError(f"Perplexity must be positive, got {perplexity}")
    if len(vectors) < 3 * perplexity + 1:
        raise DataError(f"t-SNE with perplexity {perplexity} needs at least {int(3 * perplexity) + 1} points, got {len(vectors)}")
    return vectors


def _row_affinities(distances: np.ndarray, target_entropy: float) -> Tuple[np.ndarray, float]:
    """Bisection on the precision of one row of squared distances."""
    shifted = distances - distances.min()
    mean = shifted.mean()
    beta = 1.0 / mean if mean > 0 else 1.0
    low, high = -np.inf, np.inf
    row = np.ones_like(shifted) / len(shifted)
    for _ in range(MAX_BISECTION_STEPS):
        weights = np.exp(-shifted * beta)
        total = weights.sum()
        row = weights / total
        entropy = np.log(total) + beta * np.sum(shifted * row)
        gap = entropy - target_entropy
        if abs(gap) < ENTROPY_TOLERANCE:
            break
        if gap > 0:
            low = beta
            beta = beta * 2.0 if high == np.inf else (beta + high) / 2.0
        else:
            high = beta
            beta = beta / 2.0 if low == -np.inf else (beta + low) / 2.0
    return row, beta


def conditional_affinities(vectors: np.ndarray, perplexity: float = TSNE_PERPLEXITY) -> np.ndarray:
    """
    Row-stochastic conditional affinities p(j|i) with zero diagonal.

    Args:
        vectors: (N, D) inputs
        perplexity: Target perplexity of every row

    Returns:
        (N, N) matrix
    """
    vectors = _check_inputs(vectors, perplexity)
    distances = squareform(pdist(vectors, 'sqeuclidean'))
    n = len(vectors)
    target = np.log(perplexity)
    conditional = np.zeros((n, n))
    for i in range(n):
        others = np.r_[0:i, i + 1:n]
        conditional[i, others], _ = _row_affinities(distances[i, others], target)
    return conditional


def row_perplexities(conditional: np.ndarray) -> np.ndarray:
    """exp(entropy) of every conditional row."""
    with np.errstate(divide='ignore', invalid='ignore'):
        terms = np.where(conditional > 0, conditional * np.log(conditional), 0.0)
    return np.exp(-terms.sum(axis=1))


def joint_affinities(vectors: np.ndarray, perplexity: float = TSNE_PERPLEXITY) -> np.ndarray:
    """Symmetrized affinities (P + P^T) / 2N, summing to 1."""
    conditional = conditional_affinities(vectors, perplexity)
    return (conditional + conditional.T) / (2.0 * len(conditional))


def student_t_affinities(coordinates: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Output affinities Q and the unnormalized kernel 1 / (1 + d^2)."""
    kernel = 1.0 / (1.0 + squareform(pdist(coordinates, 'sqeuclidean')))
    np.fill_diagonal(kernel, 0.0)
    return np.maximum(kernel / kernel.sum(), Q_FLOOR), kernel


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL(P || Q) over entries with P > 0."""
    positive = p > 0
    return float(np.sum(p[positive] * np.log(p[positive] / q[positive])))


def tsne(
    vectors: np.ndarray,
    perplexity: float = TSNE_PERPLEXITY,
    iterations: int = TSNE_ITERATIONS,
    seed: int = DEFAULT_SEED,
    learning_rate: float = TSNE_LEARNING_RATE,
    early_exaggeration: float = TSNE_EARLY_EXAGGERATION,
    exaggeration_iterations: int = TSNE_EXAGGERATION_ITERATIONS,
) -> TsneResult:
    """
    Embed vectors in 2-D.

    Args:
        vectors: (N, D) inputs, N >= 3 * perplexity + 1
        perplexity: Target perplexity
        iterations: Gradient descent iterations
        seed: Seed of the Gaussian initialization
        learning_rate: Step size
        early_exaggeration: Factor applied to P during the first iterations
        exaggeration_iterations: Iterations with exaggeration and momentum 0.5

    Returns:
        TsneResult
    """
    validate_positive(iterations, 't-SNE iterations')
    validate_positive(learning_rate, 't-SNE learning rate')
    p = joint_affinities(vectors, perplexity)
    n = len(p)
    rng = np.random.default_rng(seed)
    coordinates = rng.normal(0.0, INITIAL_SCALE, size=(n, 2))
    velocity = np.zeros_like(coordinates)
    gains = np.ones_like(coordinates)
    history = np.zeros(iterations)

    for it in range(iterations):
        early = it < exaggeration_iterations
        exaggeration = early_exaggeration if early else 1.0
        momentum = 0.5 if early else 0.8

        q, kernel = student_t_affinities(coordinates)
        weights = (exaggeration * p - q) * kernel
        gradient = 4.0 * (weights.sum(axis=1)[:, None] * coordinates - weights @ coordinates)

        same_sign = (gradient > 0) == (velocity > 0)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        gains = np.maximum(gains, MIN_GAIN)
        velocity = momentum * velocity - learning_rate * gains * gradient
        coordinates = coordinates + velocity
        coordinates = coordinates - coordinates.mean(axis=0)

        history[it] = kl_divergence(p, q)
        if (it + 1) % 100 == 0:
            logger.info("t-SNE iteration %d/%d: KL=%.4f", it + 1, iterations, history[it])

    if not np.all(np.isfinite(coordinates)):
        raise NumericError("t-SNE diverged to non-finite coordinates")
    return TsneResult(coordinates=coordinates, kl_divergence=history)
