"""
Relief channels derived from a digital elevation model.

Partial derivatives come from a local quadratic fitted to each 3x3
neighborhood (Evans-Young nine-point stencils). X points east, Y points
north, and the first grid row is the northern edge.
"""
import logging
from typing import NamedTuple, Tuple

import numpy as np
from scipy import ndimage

from config.settings import STACK_NODATA
from src.core.errors import OutOfNeighborhoodError
from src.models.raster import BASELINE_BY_NAME, DemGrid, RasterStack

logger = logging.getLogger(__name__)

FLAT_SLOPE_DEGREES = 1e-6
FLAT_ASPECT = -1.0
CURVATURE_GUARD = 1e-12
TERRAIN_CHANNELS = ('dem', 'slope', 'aspect', 'tangential_curvature', 'profile_curvature')

# Stencils in window layout (z1 z2 z3 / z4 z5 z6 / z7 z8 z9), unscaled
_P = np.array([[-1, 0, 1], [-1, 0, 1], [-1, 0, 1]], dtype=np.float64)
_Q = np.array([[1, 1, 1], [0, 0, 0], [-1, -1, -1]], dtype=np.float64)
_R = np.array([[1, -2, 1], [1, -2, 1], [1, -2, 1]], dtype=np.float64)
_S = np.array([[-1, 0, 1], [0, 0, 0], [1, 0, -1]], dtype=np.float64)
_T = np.array([[1, 1, 1], [-2, -2, -2], [1, 1, 1]], dtype=np.float64)


class SurfaceCoefficients(NamedTuple):
    """z ~ z0 + p*X + q*Y + r*X^2/2 + s*X*Y + t*Y^2/2 around a pixel."""

    z0: float
    p: float
    q: float
    r: float
    s: float
    t: float


def _scaled_stencils(cell_size: float) -> Tuple[np.ndarray, ...]:
    g = float(cell_size)
    return _P / (6 * g), _Q / (6 * g), _R / (3 * g * g), _S / (4 * g * g), _T / (3 * g * g)


def fit_local_quadratic(dem: DemGrid, x: int, y: int) -> SurfaceCoefficients:
    """
    Fit the local quadratic surface around one interior pixel.

    Args:
        dem: Elevation grid
        x: Column of the pixel
        y: Row of the pixel

    Returns:
        SurfaceCoefficients
    """
    if not (1 <= x <= dem.width - 2 and 1 <= y <= dem.height - 2):
        raise OutOfNeighborhoodError(f"Pixel ({x}, {y}) has no full 3x3 neighborhood in {dem.width}x{dem.height}")
    window = dem.elevation[y - 1:y + 2, x - 1:x + 2]
    p, q, r, s, t = (float(np.sum(window * k)) for k in _scaled_stencils(dem.cell_size))
    return SurfaceCoefficients(float(window[1, 1]), p, q, r, s, t)


def interior_mask(height: int, width: int) -> np.ndarray:
    """True for pixels with a full 3x3 neighborhood."""
    mask = np.zeros((height, width), dtype=bool)
    mask[1:-1, 1:-1] = True
    return mask


def derivative_grids(dem: DemGrid) -> Tuple[np.ndarray, ...]:
    """
    Coefficient grids (p, q, r, s, t) for every pixel.

    Border values are meaningless; callers mask them with interior_mask.
    """
    return tuple(
        ndimage.correlate(dem.elevation, kernel, mode='nearest')
        for kernel in _scaled_stencils(dem.cell_size)
    )


def slope(dem: DemGrid, nodata: float = STACK_NODATA) -> np.ndarray:
    """
    Slope in degrees.

    Args:
        dem: Elevation grid
        nodata: Value written to border pixels

    Returns:
        (height, width) grid
    """
    p, q, _, _, _ = derivative_grids(dem)
    values = np.degrees(np.arctan(np.hypot(p, q)))
    return np.where(interior_mask(dem.height, dem.width), values, nodata)


def aspect(dem: DemGrid, nodata: float = STACK_NODATA) -> np.ndarray:
    """
    Downslope direction in compass degrees [0, 360), clockwise from north.

    Flat pixels get -1 and border pixels get nodata.
    """
    p, q, _, _, _ = derivative_grids(dem)
    values = np.mod(np.degrees(np.arctan2(-p, -q)), 360.0)
    values = np.where(values >= 360.0, 0.0, values)
    flat = np.degrees(np.arctan(np.hypot(p, q))) < FLAT_SLOPE_DEGREES
    values = np.where(flat, FLAT_ASPECT, values)
    return np.where(interior_mask(dem.height, dem.width), values, nodata)


def curvatures(dem: DemGrid, nodata: float = STACK_NODATA) -> Tuple[np.ndarray, np.ndarray]:
    """
    Profile and tangential curvature in 1/m.

    Negative values mark ground that is convex as a function of position
    (a bowl); a dome is positive. The same note travels in the channel
    metadata of the stack.

    Returns:
        (profile, tangential) grids
    """
    p, q, r, s, t = derivative_grids(dem)
    gradient = p * p + q * q
    guarded = gradient >= CURVATURE_GUARD
    denominator = np.where(guarded, gradient, 1.0)
    profile = -(p * p * r + 2 * p * q * s + q * q * t) / (denominator * (1 + gradient) ** 1.5)
    tangential = -(q * q * r - 2 * p * q * s + p * p * t) / (denominator * np.sqrt(1 + gradient))
    inside = interior_mask(dem.height, dem.width)
    profile = np.where(inside, np.where(guarded, profile, 0.0), nodata)
    tangential = np.where(inside, np.where(guarded, tangential, 0.0), nodata)
    return profile, tangential


def terrain_stack(dem: DemGrid, nodata: float = STACK_NODATA) -> RasterStack:
    """
    Five relief channels: DEM, slope, aspect, tangential and profile curvature.

    Args:
        dem: Elevation grid
        nodata: Value used for border pixels of derived channels

    Returns:
        5-channel RasterStack
    """
    profile, tangential = curvatures(dem, nodata)
    grids = {
        'dem': dem.elevation,
        'slope': slope(dem, nodata),
        'aspect': aspect(dem, nodata),
        'tangential_curvature': tangential,
        'profile_curvature': profile,
    }
    logger.debug("Derived terrain channels for %dx%d DEM", dem.width, dem.height)
    return RasterStack(
        width=dem.width,
        height=dem.height,
        channels=[BASELINE_BY_NAME[name] for name in TERRAIN_CHANNELS],
        data=np.stack([grids[name] for name in TERRAIN_CHANNELS]).astype(np.float32),
        nodata=nodata,
    )
