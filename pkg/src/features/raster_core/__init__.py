"""
Raster core feature package.
"""

from .repository import RasterRepository, read_labels, read_stack, write_labels, write_stack  # noqa: F401
from .service import (  # noqa: F401
    RasterService,
    apply_normalization,
    build_baseline_stack,
    compute_ndvi,
    compute_ndwi,
    fit_normalization,
    fit_normalization_values,
    normalize_values,
    stack_channels,
)
