"""
Terrain feature package.
"""

from .service import (  # noqa: F401
    SurfaceCoefficients,
    aspect,
    curvatures,
    fit_local_quadratic,
    slope,
    terrain_stack,
)
