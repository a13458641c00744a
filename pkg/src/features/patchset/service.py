"""
Service layer for patch sets.

Extracts homogeneous 3x3 windows from a stack and its labels, balances
classes by subsampling, assigns stratified train/val/test splits and
applies the eight exact symmetries of the square as augmentation.
"""
import logging
from typing import List, Optional, Sequence

import numpy as np

from config.settings import DEFAULT_SEED, SPLIT_RATIOS
from src.core.errors import ConfigError, CoverageError, ShapeError
from src.features.patchset.repository import PatchSetRepository
from src.features.raster_core.repository import RasterRepository
from src.models.patches import PATCH_SIZE, SPLIT_NAMES, Patch, PatchSet, split_tag
from src.models.raster import NODATA_LABEL, ChannelDesc, ClassCatalog, LabelRaster, RasterStack
from src.utils.validators import validate_ratios

logger = logging.getLogger(__name__)

TRANSFORM_NAMES = (
    'identity', 'rot90', 'rot180', 'rot270', 'flipH', 'flipV', 'transpose', 'anti-transpose',
)
TRANSFORM_COUNT = len(TRANSFORM_NAMES)


def extract_homogeneous(stack: RasterStack, labels: LabelRaster, catalog: ClassCatalog) -> List[Patch]:
    """
    Collect every stride-3 window whose nine labels agree.

    Windows are anchored at (0, 0) and visited in row-major order. A window
    is kept when its labels are identical, not the sentinel, present in the
    catalog, and none of its stack values is nodata.

    Args:
        stack: Channel stack
        labels: Label raster of the same extent
        catalog: Classes to keep

    Returns:
        List of Patch
    """
    if (stack.height, stack.width) != (labels.height, labels.width):
        raise ShapeError(
            f"Stack is {stack.width}x{stack.height} but labels are {labels.width}x{labels.height}"
        )
    rows, cols = stack.height // PATCH_SIZE, stack.width // PATCH_SIZE
    span_y, span_x = rows * PATCH_SIZE, cols * PATCH_SIZE

    tiles = labels.labels[:span_y, :span_x].reshape(rows, PATCH_SIZE, cols, PATCH_SIZE).transpose(0, 2, 1, 3)
    tiles = tiles.reshape(rows, cols, PATCH_SIZE * PATCH_SIZE)
    first = tiles[..., 0]
    uniform = np.all(tiles == first[..., None], axis=-1)
    known = np.isin(first, catalog.ids) & (first != NODATA_LABEL)
    valid = stack.valid_mask()[:span_y, :span_x].reshape(rows, PATCH_SIZE, cols, PATCH_SIZE).all(axis=(1, 3))
    keep = uniform & known & valid

    index_of = {cid: catalog.index_of(cid) for cid in catalog.ids}
    values = np.moveaxis(stack.data, 0, -1)
    patches = []
    for row, col in zip(*np.nonzero(keep)):
        y, x = int(row) * PATCH_SIZE, int(col) * PATCH_SIZE
        patches.append(Patch(
            values=values[y:y + PATCH_SIZE, x:x + PATCH_SIZE],
            label_index=index_of[int(first[row, col])],
            source_xy=(x, y),
        ))
    logger.info("Extracted %d homogeneous patches from %d windows", len(patches), rows * cols)
    return patches


def _class_positions(patches: Sequence[Patch], catalog: ClassCatalog) -> List[np.ndarray]:
    labels = np.array([p.label_index for p in patches], dtype=np.int64)
    return [np.flatnonzero(labels == entry.index) for entry in catalog]


def balance(patches: Sequence[Patch], catalog: ClassCatalog, seed: int = DEFAULT_SEED) -> List[Patch]:
    """
    Subsample every class down to the smallest class count.

    Args:
        patches: Extracted patches
        catalog: Classes that must all be present
        seed: Generator seed

    Returns:
        Balanced patches, in their original relative order
    """
    positions = _class_positions(patches, catalog)
    for entry, idx in zip(catalog, positions):
        if len(idx) == 0:
            raise CoverageError(f"Class {entry.id} ({entry.name}) has no patches")
    target = min(len(idx) for idx in positions)
    rng = np.random.default_rng(seed)
    chosen = []
    for idx in positions:
        chosen.append(np.sort(rng.choice(idx, size=target, replace=False)))
    keep = np.sort(np.concatenate(chosen))
    logger.info("Balanced %d classes to %d patches each", len(catalog), target)
    return [patches[i] for i in keep]


def allocate_counts(n: int, ratios: Sequence[float]) -> np.ndarray:
    """
    Largest-remainder allocation of n items over the split ratios.

    Ties in the fractional part go to the earlier split (train, val, test).
    """
    raw = np.round(n * np.asarray(ratios, dtype=np.float64), 9)
    counts = np.floor(raw).astype(np.int64)
    remainder = n - int(counts.sum())
    order = np.argsort(-(raw - counts), kind='stable')
    counts[order[:remainder]] += 1
    return counts


def split(
    patches: Sequence[Patch],
    catalog: ClassCatalog,
    channels: Sequence[ChannelDesc],
    ratios: Sequence[float] = SPLIT_RATIOS,
    seed: int = DEFAULT_SEED,
) -> PatchSet:
    """
    Stratified shuffle-then-partition into train/val/test.

    Args:
        patches: Patches to split
        catalog: Class catalog
        channels: Channel descriptors of the patch values
        ratios: Train/val/test fractions summing to 1
        seed: Generator seed

    Returns:
        PatchSet keeping the input patch order
    """
    ratios = validate_ratios(ratios)
    rng = np.random.default_rng(seed)
    tags = np.zeros(len(patches), dtype=np.uint8)
    for idx in _class_positions(patches, catalog):
        shuffled = rng.permutation(idx)
        bounds = np.cumsum(allocate_counts(len(idx), ratios))
        for tag, part in enumerate(np.split(shuffled, bounds[:-1])):
            tags[part] = tag
    patchset = PatchSet.from_patches(patches, catalog, channels, splits=tags, seed=seed)
    logger.info(
        "Split %d patches: %s", len(patchset),
        ', '.join(f"{name}={len(patchset.split_indices(name))}" for name in SPLIT_NAMES),
    )
    return patchset


def _check_transform(transform_id: int) -> int:
    if not 0 <= int(transform_id) < TRANSFORM_COUNT:
        raise ConfigError(f"Transform id must be in 0..{TRANSFORM_COUNT - 1}, got {transform_id}")
    return int(transform_id)


def apply_transform(values: np.ndarray, transform_id: int, axes=(0, 1)) -> np.ndarray:
    """
    Apply one symmetry of the square to the two spatial axes.

    Args:
        values: Array with spatial axes at `axes` (rows, columns)
        transform_id: 0 identity, 1-3 rotations by 90/180/270, 4 flipH,
            5 flipV, 6 transpose, 7 anti-transpose
        axes: (row axis, column axis)

    Returns:
        Transformed copy
    """
    transform_id = _check_transform(transform_id)
    row, col = axes
    if transform_id == 0:
        out = values
    elif transform_id <= 3:
        out = np.rot90(values, k=transform_id, axes=axes)
    elif transform_id == 4:
        out = np.flip(values, axis=col)
    elif transform_id == 5:
        out = np.flip(values, axis=row)
    elif transform_id == 6:
        out = np.swapaxes(values, row, col)
    else:
        out = np.swapaxes(np.flip(values, axis=(row, col)), row, col)
    return np.ascontiguousarray(out)


def augment(patch: Patch, transform_id: int) -> Patch:
    """Transformed copy of a patch; the label is unchanged."""
    return Patch(apply_transform(patch.values, transform_id), patch.label_index, patch.source_xy)


def augment_batch(values: np.ndarray, transform_ids: np.ndarray) -> np.ndarray:
    """
    Apply a per-sample transform to a batch (N, 3, 3, C).

    Args:
        values: Batch of patch tensors
        transform_ids: One transform id per sample

    Returns:
        Augmented batch
    """
    transform_ids = np.asarray(transform_ids, dtype=np.int64)
    if transform_ids.shape != (len(values),):
        raise ShapeError(f"{transform_ids.shape} transform ids for {len(values)} samples")
    out = np.empty_like(values)
    for tid in np.unique(transform_ids):
        mask = transform_ids == tid
        out[mask] = apply_transform(values[mask], int(tid), axes=(1, 2))
    return out


class PatchSetService:
    """Builds patch set files from stack and label files."""

    def __init__(
        self,
        repo: Optional[PatchSetRepository] = None,
        raster_repo: Optional[RasterRepository] = None,
    ) -> None:
        self.repo = repo or PatchSetRepository()
        self.raster_repo = raster_repo or RasterRepository()

    def create_patchset(
        self,
        stack_path,
        labels_path,
        output_path,
        ratios: Sequence[float] = SPLIT_RATIOS,
        seed: int = DEFAULT_SEED,
        balanced: bool = True,
        catalog: Optional[ClassCatalog] = None,
    ) -> PatchSet:
        """
        Extract, balance and split patches, then write the patch set.

        Args:
            stack_path: Stack file
            labels_path: Label raster file
            output_path: Patch set base path
            ratios: Train/val/test fractions
            seed: Seed for balancing and splitting
            balanced: Subsample classes to equal counts first
            catalog: Class catalog; defaults to the one embedded in the labels,
                then to the 17-class baseline catalog

        Returns:
            The written PatchSet
        """
        stack = self.raster_repo.read_stack(stack_path)
        labels = self.raster_repo.read_labels(labels_path)
        catalog = catalog or labels.catalog or ClassCatalog.baseline()
        patches = extract_homogeneous(stack, labels, catalog)
        if balanced:
            patches = balance(patches, catalog, seed)
        patchset = split(patches, catalog, stack.channels, ratios, seed)
        self.repo.write_patchset(patchset, output_path)
        return patchset


def count_by_split(patchset: PatchSet) -> dict:
    """Patch counts keyed by split name."""
    return {name: int(np.sum(patchset.splits == split_tag(name))) for name in SPLIT_NAMES}
