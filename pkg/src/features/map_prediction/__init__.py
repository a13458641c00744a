"""
Map prediction feature package.
"""

from .repository import MapRepository  # noqa: F401
from .service import MapResult, MapService, interior_agreement, predict_map, render_classes  # noqa: F401
