"""
Service layer for raster stacks.

Band math (NDVI/NDWI), channel stacking, per-channel z-score
normalization and assembly of the 13-channel baseline stack.
"""
import logging
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import CELL_SIZE, NDWI_FLIP, STACK_NODATA
from src.core.errors import CatalogError, EmptySampleError, ShapeError
from src.features.raster_core.repository import RasterRepository
from src.features.terrain.service import terrain_stack
from src.models.raster import (
    BASELINE_BY_NAME,
    BASELINE_CHANNELS,
    SPECTRAL_BAND_NAMES,
    ChannelDesc,
    DemGrid,
    NormalizationParams,
    RasterStack,
    nodata_mask,
)
from src.utils.validators import validate_same_shape

logger = logging.getLogger(__name__)

RATIO_EPSILON = 1e-12
DEGENERATE_STD = 1e-12

NamedGrid = Tuple[Union[str, ChannelDesc], np.ndarray]


def normalized_difference(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a - b) / (a + b), with 0 where |a + b| < 1e-12."""
    validate_same_shape(a, b, what='band grids')
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    total = a + b
    safe = np.abs(total) >= RATIO_EPSILON
    out = np.zeros_like(total)
    np.divide(a - b, total, out=out, where=safe)
    return out


def compute_ndvi(nir: np.ndarray, red: np.ndarray) -> np.ndarray:
    """
    Normalized difference vegetation index.

    Args:
        nir: Near-infrared reflectance grid
        red: Red reflectance grid

    Returns:
        Grid of (nir - red) / (nir + red)
    """
    return normalized_difference(nir, red)


def compute_ndwi(nir: np.ndarray, swir: np.ndarray, flip: bool = False) -> np.ndarray:
    """
    Normalized difference water index.

    Args:
        nir: Near-infrared reflectance grid
        swir: Shortwave-infrared reflectance grid
        flip: Use (swir - nir) instead of (nir - swir)

    Returns:
        Index grid
    """
    if flip:
        return normalized_difference(swir, nir)
    return normalized_difference(nir, swir)


def _describe(channel: Union[str, ChannelDesc]) -> ChannelDesc:
    if isinstance(channel, ChannelDesc):
        return channel
    return BASELINE_BY_NAME.get(channel, ChannelDesc(channel, 'spectral'))


def stack_channels(
    bands: Union[Mapping[str, np.ndarray], Sequence[NamedGrid]],
    order: Sequence[str],
    nodata: float = STACK_NODATA,
    crs: Optional[str] = None,
) -> RasterStack:
    """
    Stack named grids into a RasterStack in the given channel order.

    Args:
        bands: Mapping of name -> grid, or (name or ChannelDesc, grid) pairs
        order: Channel names, each referencing a band exactly once
        nodata: Stack nodata value
        crs: Optional opaque CRS tag

    Returns:
        RasterStack with channels in `order`
    """
    items = list(bands.items()) if isinstance(bands, Mapping) else list(bands)
    by_name: Dict[str, Tuple[ChannelDesc, np.ndarray]] = {}
    for channel, grid in items:
        desc = _describe(channel)
        if desc.name in by_name:
            raise CatalogError(f"Duplicate band name {desc.name!r}")
        by_name[desc.name] = (desc, np.asarray(grid))

    if len(set(order)) != len(order):
        raise CatalogError(f"Channel order repeats a name: {list(order)}")
    missing = [name for name in order if name not in by_name]
    if missing:
        raise CatalogError(f"Channel order references unknown bands {missing}")
    if not order:
        raise CatalogError("Channel order is empty")

    grids = [by_name[name][1] for name in order]
    height, width = validate_same_shape(*grids, what='band grids')
    return RasterStack(
        width=width,
        height=height,
        channels=[by_name[name][0] for name in order],
        data=np.stack(grids).astype(np.float32),
        nodata=nodata,
        crs=crs,
    )


def _fit_columns(matrix: np.ndarray, valid: np.ndarray) -> NormalizationParams:
    """Z-score parameters per column of a (pixels, channels) matrix."""
    counts = valid.sum(axis=0)
    if counts.size == 0 or np.any(counts == 0):
        raise EmptySampleError("No valid values to fit normalization on")
    filled = np.where(valid, matrix, 0.0)
    mean = filled.sum(axis=0) / counts
    centered = np.where(valid, matrix - mean, 0.0)
    std = np.sqrt((centered * centered).sum(axis=0) / counts)
    std = np.where(std < DEGENERATE_STD, 1.0, std)
    return NormalizationParams(mean=mean, std=std)


def fit_normalization(stack: RasterStack, mask: Optional[np.ndarray] = None) -> NormalizationParams:
    """
    Fit per-channel mean and population standard deviation.

    Args:
        stack: Raster stack
        mask: Optional (height, width) boolean selection of pixels

    Returns:
        NormalizationParams; zero-variance channels get sd 1
    """
    selected = np.ones((stack.height, stack.width), dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    if selected.shape != (stack.height, stack.width):
        raise ShapeError(f"Mask shape {selected.shape} does not match stack {(stack.height, stack.width)}")
    if selected.sum() < 2:
        raise EmptySampleError("Normalization mask selects fewer than 2 pixels")
    valid = ~nodata_mask(stack.data, stack.nodata) & selected
    matrix = stack.data.reshape(stack.channel_count, -1).T.astype(np.float64)
    return _fit_columns(matrix, valid.reshape(stack.channel_count, -1).T)


def apply_normalization(stack: RasterStack, params: NormalizationParams) -> RasterStack:
    """
    Standardize every channel; nodata cells are left untouched.

    Args:
        stack: Raster stack
        params: One (mean, sd) pair per channel

    Returns:
        New RasterStack
    """
    if len(params) != stack.channel_count:
        raise ShapeError(f"{len(params)} normalization pairs for {stack.channel_count} channels")
    data = stack.data.astype(np.float64)
    scaled = (data - params.mean[:, None, None]) / params.std[:, None, None]
    out = np.where(nodata_mask(stack.data, stack.nodata), stack.data, scaled).astype(np.float32)
    return RasterStack(stack.width, stack.height, list(stack.channels), out, stack.nodata, stack.crs)


def fit_normalization_values(values: np.ndarray) -> NormalizationParams:
    """Fit z-score parameters over the last axis of a patch tensor (..., C)."""
    matrix = np.asarray(values, dtype=np.float64)
    matrix = matrix.reshape(-1, matrix.shape[-1])
    if len(matrix) < 2:
        raise EmptySampleError("Need at least 2 values per channel to fit normalization")
    return _fit_columns(matrix, np.isfinite(matrix))


def normalize_values(values: np.ndarray, params: NormalizationParams) -> np.ndarray:
    """Apply z-score parameters over the last axis of a tensor."""
    values = np.asarray(values)
    if values.shape[-1] != len(params):
        raise ShapeError(f"{len(params)} normalization pairs for {values.shape[-1]} channels")
    return (values - params.mean) / params.std


def build_baseline_stack(
    bands: RasterStack,
    dem: DemGrid,
    ndwi_flip: bool = NDWI_FLIP,
    nodata: float = STACK_NODATA,
) -> RasterStack:
    """
    Assemble the 13-channel stack: six bands, NDVI, NDWI and five terrain channels.

    Args:
        bands: Stack holding the spectral channels by name
        dem: Elevation grid of the same extent
        ndwi_flip: Use the (swir - nir) orientation for NDWI
        nodata: Output nodata value

    Returns:
        RasterStack in baseline channel order
    """
    if (bands.height, bands.width) != (dem.height, dem.width):
        raise ShapeError(
            f"Bands are {bands.width}x{bands.height} but DEM is {dem.width}x{dem.height}"
        )
    spectral = {name: bands.channel(name).astype(np.float64) for name in SPECTRAL_BAND_NAMES}
    invalid = np.zeros((bands.height, bands.width), dtype=bool)
    for grid in spectral.values():
        invalid |= nodata_mask(grid, bands.nodata)

    grids: Dict[str, np.ndarray] = {}
    for name, grid in spectral.items():
        grids[name] = np.where(invalid, nodata, grid)
    grids['ndvi'] = np.where(invalid, nodata, compute_ndvi(spectral['nir'], spectral['red']))
    grids['ndwi'] = np.where(invalid, nodata, compute_ndwi(spectral['nir'], spectral['swir1'], flip=ndwi_flip))
    relief = terrain_stack(dem, nodata=nodata)
    for name in relief.channel_names:
        grids[name] = relief.channel(name)

    logger.info("Built %d-channel stack of %dx%d pixels", len(BASELINE_CHANNELS), bands.width, bands.height)
    return stack_channels(
        [(desc, grids[desc.name]) for desc in BASELINE_CHANNELS],
        [desc.name for desc in BASELINE_CHANNELS],
        nodata=nodata,
        crs=bands.crs,
    )


class RasterService:
    """Raster workflows used by the command line."""

    def __init__(self, repo: Optional[RasterRepository] = None) -> None:
        self.repo = repo or RasterRepository()

    def build_stack(
        self,
        bands_path,
        dem_path,
        output_path,
        cell_size: float = CELL_SIZE,
        ndwi_flip: bool = NDWI_FLIP,
    ) -> RasterStack:
        """
        Read the band and DEM files, build the baseline stack and write it.

        Args:
            bands_path: Stack file with the six spectral channels
            dem_path: Single-channel elevation stack file
            output_path: Output stack base path
            cell_size: DEM cell size in meters
            ndwi_flip: NDWI orientation toggle

        Returns:
            The written stack
        """
        bands = self.repo.read_stack(bands_path)
        dem_stack = self.repo.read_stack(dem_path)
        if dem_stack.channel_count != 1:
            raise ShapeError(f"DEM file must hold one channel, has {dem_stack.channel_count}")
        dem = DemGrid(dem_stack.data[0].astype(np.float64), cell_size=cell_size)
        stack = build_baseline_stack(bands, dem, ndwi_flip=ndwi_flip, nodata=bands.nodata)
        self.repo.write_stack(stack, output_path)
        return stack

    def derive_terrain(self, dem_path, output_path, cell_size: float = CELL_SIZE) -> RasterStack:
        """Write the 5-channel relief stack derived from a DEM file."""
        dem_stack = self.repo.read_stack(dem_path)
        if dem_stack.channel_count != 1:
            raise ShapeError(f"DEM file must hold one channel, has {dem_stack.channel_count}")
        relief = terrain_stack(DemGrid(dem_stack.data[0].astype(np.float64), cell_size=cell_size), dem_stack.nodata)
        self.repo.write_stack(relief, output_path)
        return relief
