"""
Synthetic stack and label fixtures.

Classes are Gaussian clusters in channel space laid out as rectangular
regions aligned to the 3x3 patch grid, so every tile of a region yields a
homogeneous patch.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config.settings import DEFAULT_SEED, STACK_NODATA
from src.core.errors import ConfigError
from src.features.raster_core.repository import RasterRepository
from src.models.patches import PATCH_SIZE
from src.models.raster import BASELINE_CHANNELS, ChannelDesc, ClassCatalog, LabelRaster, RasterStack

logger = logging.getLogger(__name__)


@dataclass
class FixtureSpec:
    """
    Geometry and channel statistics of a synthetic fixture.

    Attributes:
        num_classes: Number of classes (ids 1..num_classes)
        width: Raster width, a multiple of the tile size
        height: Raster height, a multiple of the tile size
        tile: Side of one square class region, a multiple of 3
        channels: Channel count; 13 uses the baseline channel names
        separation: Distance of each class mean from the origin, in sigmas
        sigma: Per-pixel noise standard deviation
        confusable_pairs: Class index pairs whose second member copies the
            first member's mean plus pair_offset sigmas
        pair_offset: Mean offset inside a confusable pair, in sigmas
    """

    num_classes: int = 4
    width: int = 36
    height: int = 36
    tile: int = 6
    channels: int = len(BASELINE_CHANNELS)
    separation: float = 10.0
    sigma: float = 1.0
    confusable_pairs: List[Tuple[int, int]] = field(default_factory=list)
    pair_offset: float = 0.0

    def __post_init__(self):
        if self.num_classes < 2:
            raise ConfigError(f"Need at least 2 classes, got {self.num_classes}")
        if self.tile < PATCH_SIZE or self.tile % PATCH_SIZE:
            raise ConfigError(f"Tile size must be a positive multiple of {PATCH_SIZE}, got {self.tile}")
        if self.width % self.tile or self.height % self.tile or min(self.width, self.height) < self.tile:
            raise ConfigError(f"{self.width}x{self.height} raster is not a whole number of {self.tile}-pixel tiles")
        if self.regions < self.num_classes:
            raise ConfigError(f"{self.regions} regions cannot hold {self.num_classes} classes")
        if self.channels < 1 or self.num_classes > 2 * self.channels:
            raise ConfigError(f"{self.channels} channels cannot separate {self.num_classes} classes")
        if not self.sigma > 0 or self.separation < 0:
            raise ConfigError("sigma must be positive and separation nonnegative")
        partners = [c for pair in self.confusable_pairs for c in pair]
        if len(set(partners)) != len(partners) or any(not 0 <= c < self.num_classes for c in partners):
            raise ConfigError(f"Invalid confusable pairs {self.confusable_pairs}")

    @property
    def regions(self) -> int:
        return (self.width // self.tile) * (self.height // self.tile)

    @property
    def channel_descs(self) -> List[ChannelDesc]:
        if self.channels == len(BASELINE_CHANNELS):
            return list(BASELINE_CHANNELS)
        return [ChannelDesc(f"c{i}", 'spectral') for i in range(self.channels)]

    @property
    def catalog(self) -> ClassCatalog:
        ids = range(1, self.num_classes + 1)
        return ClassCatalog.from_ids(list(ids), [f"class {i}" for i in ids])


def class_means(spec: FixtureSpec) -> np.ndarray:
    """
    Mean vector (num_classes, channels) of every class.

    Class k sits on axis k mod channels, on the negative side once the
    axes are used up.
    """
    means = np.zeros((spec.num_classes, spec.channels))
    for k in range(spec.num_classes):
        sign = 1.0 if k < spec.channels else -1.0
        means[k, k % spec.channels] = sign * spec.separation * spec.sigma
    for first, second in spec.confusable_pairs:
        offset = np.zeros(spec.channels)
        offset[second % spec.channels] = spec.pair_offset * spec.sigma
        means[second] = means[first] + offset
    return means


def generate_fixture(spec: FixtureSpec, seed: int = DEFAULT_SEED) -> Tuple[RasterStack, LabelRaster]:
    """
    Generate a stack and its label raster.

    Args:
        spec: Fixture geometry and statistics
        seed: Random seed

    Returns:
        (stack, labels); labels carry the catalog
    """
    rng = np.random.default_rng(seed)
    rows, cols = spec.height // spec.tile, spec.width // spec.tile
    region_class = rng.permutation(np.resize(np.arange(spec.num_classes), rows * cols)).reshape(rows, cols)
    index_grid = np.kron(region_class, np.ones((spec.tile, spec.tile), dtype=np.int64))

    means = class_means(spec)
    noise = rng.normal(0.0, spec.sigma, size=(spec.channels, spec.height, spec.width))
    data = (np.moveaxis(means[index_grid], -1, 0) + noise).astype(np.float32)

    catalog = spec.catalog
    stack = RasterStack(spec.width, spec.height, spec.channel_descs, data, nodata=STACK_NODATA)
    labels = LabelRaster(spec.width, spec.height, catalog.id_lookup()[index_grid], catalog=catalog)
    logger.info(
        "Generated %dx%d fixture with %d classes in %d regions", spec.width, spec.height, spec.num_classes, spec.regions
    )
    return stack, labels


class SyntheticService:
    """Writes synthetic fixtures to stack and label files."""

    def __init__(self, repo: Optional[RasterRepository] = None) -> None:
        self.repo = repo or RasterRepository()

    def create_fixture(self, spec: FixtureSpec, stack_path, labels_path, seed: int = DEFAULT_SEED):
        stack, labels = generate_fixture(spec, seed)
        self.repo.write_stack(stack, stack_path)
        self.repo.write_labels(labels, labels_path)
        return stack, labels


def parse_pairs(raw: Optional[Sequence[str]]) -> List[Tuple[int, int]]:
    """Parse 'a:b' class index pairs from the command line."""
    pairs = []
    for item in raw or []:
        try:
            first, second = (int(v) for v in item.split(':'))
        except ValueError:
            raise ConfigError(f"Confusable pair must look like 'a:b', got {item!r}") from None
        pairs.append((first, second))
    return pairs
