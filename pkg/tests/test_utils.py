"""
Tests for utility functions.
"""
import numpy as np
import pytest

from src.core.errors import ConfigError, ShapeError
from src.utils.formatters import format_score, format_summary, truncate_text
from src.utils.validators import (
    validate_min_size,
    validate_positive,
    validate_rate,
    validate_ratios,
    validate_same_shape,
)


class TestValidators:
    """Test cases for validation utilities."""

    def test_same_shape(self):
        """Test that matching grids return their shape."""
        assert validate_same_shape(np.zeros((3, 4)), np.ones((3, 4))) == (3, 4)

    def test_shape_mismatch(self):
        """Test that differing grids are rejected."""
        with pytest.raises(ShapeError):
            validate_same_shape(np.zeros((3, 4)), np.zeros((4, 3)))

    def test_ratios_valid(self):
        """Test the default split ratios."""
        assert validate_ratios([0.7, 0.15, 0.15]) == (0.7, 0.15, 0.15)

    def test_ratios_invalid(self):
        """Test wrong length, negative values and a bad sum."""
        for ratios in ([0.5, 0.5], [1.2, -0.1, -0.1], [0.5, 0.3, 0.3]):
            with pytest.raises(ConfigError):
                validate_ratios(ratios)

    def test_rate(self):
        """Test the half-open dropout range."""
        assert validate_rate(0.0) == 0.0
        with pytest.raises(ConfigError):
            validate_rate(1.0)

    def test_positive(self):
        """Test that counts and step sizes must exceed zero."""
        assert validate_positive(5, 'iterations') == 5
        with pytest.raises(ConfigError):
            validate_positive(0, 'iterations')

    def test_min_size(self):
        """Test that grids need room for one window."""
        validate_min_size(3, 3)
        with pytest.raises(ShapeError):
            validate_min_size(2, 5)


class TestFormatters:
    """Test cases for formatting utilities."""

    def test_format_score(self):
        """Test score formatting."""
        assert format_score(0.7111) == '0.71'
        assert format_score(0.7111, 3) == '0.711'

    def test_format_summary(self):
        """Test the command summary line."""
        line = format_summary('train', {'epochs': 3, 'val_acc': 0.98761})
        assert line == 'train: epochs=3 val_acc=0.9876'

    def test_truncate_text_short(self):
        """Test truncation with short text."""
        assert truncate_text('Water', 10) == 'Water'

    def test_truncate_text_long(self):
        """Test truncation with long text."""
        result = truncate_text('Hydrophilic halophilic vegetation', 15)
        assert result == 'Hydrophilic ...'
        assert len(result) == 15
