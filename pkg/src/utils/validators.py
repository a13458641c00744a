"""
Input validation utilities.
"""
from typing import Sequence, Tuple

import numpy as np

from src.core.errors import ConfigError, ShapeError

RATIO_TOLERANCE = 1e-9


def validate_same_shape(*grids: np.ndarray, what: str = 'grids') -> Tuple[int, ...]:
    """
    Validate that all arrays share one shape.

    Args:
        grids: Arrays to compare
        what: Noun used in the error message

    Returns:
        The common shape
    """
    if not grids:
        raise ShapeError(f"No {what} given")
    shape = np.shape(grids[0])
    for grid in grids[1:]:
        if np.shape(grid) != shape:
            raise ShapeError(f"Dimension mismatch between {what}: {shape} vs {np.shape(grid)}")
    return shape


def validate_ratios(ratios: Sequence[float]) -> Tuple[float, ...]:
    """
    Validate train/val/test ratios.

    Args:
        ratios: Three nonnegative fractions

    Returns:
        Ratios as a tuple of floats
    """
    values = tuple(float(r) for r in ratios)
    if len(values) != 3:
        raise ConfigError(f"Expected three split ratios, got {len(values)}")
    if any(r < 0 for r in values):
        raise ConfigError(f"Split ratios must be nonnegative: {values}")
    if abs(sum(values) - 1.0) > RATIO_TOLERANCE:
        raise ConfigError(f"Split ratios must sum to 1, got {sum(values)!r}")
    return values


def validate_rate(rate: float) -> float:
    """Validate a dropout rate in [0, 1)."""
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"Dropout rate must lie in [0, 1), got {rate}")
    return float(rate)


def validate_min_size(width: int, height: int, minimum: int = 3) -> None:
    """Validate that a grid can hold a minimum mapping unit window."""
    if width < minimum or height < minimum:
        raise ShapeError(f"Grid {width}x{height} is smaller than {minimum}x{minimum}")


def validate_positive(value, name: str):
    """Validate that a count or step size is strictly positive."""
    if not value > 0:
        raise ConfigError(f"{name} must be positive, got {value}")
    return value
