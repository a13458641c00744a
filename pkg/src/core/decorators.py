"""
Decorators for model preconditions.
"""
from functools import wraps
from typing import Callable

from src.core.errors import CompatibilityError, ModeError


def require_mode(*allowed_modes: str) -> Callable:
    """
    Decorator to require a model mode on a model method.

    Usage:
        @require_mode('train')
        def backward(self, dlogits):
            # Method code here
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(self, *args, **kwargs):
            if self.mode not in allowed_modes:
                raise ModeError(
                    f"{func.__name__} requires mode {' or '.join(allowed_modes)}, "
                    f"model is in {self.mode} mode"
                )
            return func(self, *args, **kwargs)
        return wrapper
    return decorator


def require_variant(*allowed_variants: str) -> Callable:
    """
    Decorator to require a network variant on a function taking the model first.

    Usage:
        @require_variant('embedding')
        def extract_latents(model, patchset, split):
            # Function code here
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(model, *args, **kwargs):
            variant = model.descriptor.variant
            if variant not in allowed_variants:
                raise CompatibilityError(
                    f"{func.__name__} requires a {' or '.join(allowed_variants)} model, "
                    f"got {variant}"
                )
            return func(model, *args, **kwargs)
        return wrapper
    return decorator
