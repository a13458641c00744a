"""
Data formatting utilities.
"""
from typing import Any, Dict


def format_score(score: float, precision: int = 2) -> str:
    """
    Format a metric value for display.

    Args:
        score: Metric value
        precision: Decimal precision

    Returns:
        Formatted score string
    """
    return f"{score:.{precision}f}"


def format_summary(command: str, fields: Dict[str, Any]) -> str:
    """
    Format the one-line summary printed by every CLI command.

    Args:
        command: Subcommand name
        fields: Ordered key/value pairs

    Returns:
        Summary line, e.g. "train: epochs=150 val_acc=0.9876"
    """
    parts = []
    for key, value in fields.items():
        if isinstance(value, float):
            value = f"{value:.4f}"
        parts.append(f"{key}={value}")
    return f"{command}: " + ' '.join(parts)


def truncate_text(text: str, max_length: int = 40, suffix: str = '...') -> str:
    """
    Truncate text to a maximum length.

    Args:
        text: Text to truncate
        max_length: Maximum length
        suffix: Suffix to add if truncated

    Returns:
        Truncated text
    """
    if len(text) <= max_length:
        return text
    return text[:max_length - len(suffix)] + suffix
