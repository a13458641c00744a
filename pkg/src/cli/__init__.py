"""
Command line package.
"""

from .commands import COMMANDS  # noqa: F401
from .config import PipelineConfig  # noqa: F401
from .parser import build_parser  # noqa: F401
