"""
Patch data model.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import ConfigError, ShapeError
from src.models.raster import ChannelDesc, ClassCatalog

PATCH_SIZE = 3
SPLIT_NAMES = ('train', 'val', 'test')
SPLIT_TAGS = {name: tag for tag, name in enumerate(SPLIT_NAMES)}


def split_tag(name: str) -> int:
    """Byte tag of a split name."""
    try:
        return SPLIT_TAGS[name]
    except KeyError:
        raise ConfigError(f"Unknown split {name!r}; expected one of {SPLIT_NAMES}") from None


@dataclass
class Patch:
    """A homogeneous 3x3xC window and its class index."""

    values: np.ndarray
    label_index: int
    source_xy: Tuple[int, int] = (0, 0)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 3 or self.values.shape[:2] != (PATCH_SIZE, PATCH_SIZE):
            raise ShapeError(f"Patch values must be 3x3xC, got {self.values.shape}")


@dataclass
class PatchSet:
    """
    Patches stored as arrays.

    values: (N, 3, 3, C) float32
    labels: (N,) class indices into catalog
    splits: (N,) split tags (0=train, 1=val, 2=test)
    origins: (N, 2) top-left (x, y) of each source window
    """

    values: np.ndarray
    labels: np.ndarray
    splits: np.ndarray
    catalog: ClassCatalog
    channels: List[ChannelDesc]
    seed: int = 0
    origins: Optional[np.ndarray] = None

    def __post_init__(self):
        count = len(self.labels)
        self.values = np.asarray(self.values, dtype=np.float32).reshape(count, PATCH_SIZE, PATCH_SIZE, len(self.channels))
        self.labels = np.asarray(self.labels, dtype=np.uint16)
        self.splits = np.asarray(self.splits, dtype=np.uint8)
        if self.origins is None:
            self.origins = np.zeros((count, 2), dtype=np.int64)
        self.origins = np.asarray(self.origins, dtype=np.int64).reshape(count, 2)
        if len(self.splits) != count:
            raise ShapeError(f"{len(self.splits)} split tags for {count} patches")
        if count and int(self.labels.max()) >= len(self.catalog):
            raise ShapeError("Patch labels exceed the catalog size")
        if count and int(self.splits.max()) >= len(SPLIT_NAMES):
            raise ShapeError("Unknown split tag in patch set")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def channel_count(self) -> int:
        return len(self.channels)

    def patches(self) -> Iterator[Patch]:
        for i in range(len(self)):
            yield Patch(self.values[i], int(self.labels[i]), tuple(int(v) for v in self.origins[i]))

    def split_indices(self, name: str) -> np.ndarray:
        """Indices of patches assigned to a split."""
        return np.flatnonzero(self.splits == split_tag(name))

    def subset(self, selector: np.ndarray) -> 'PatchSet':
        """A new set restricted to a boolean mask or index array (catalog kept)."""
        return PatchSet(
            values=self.values[selector],
            labels=self.labels[selector],
            splits=self.splits[selector],
            catalog=self.catalog,
            channels=list(self.channels),
            seed=self.seed,
            origins=self.origins[selector],
        )

    def split_arrays(self, name: str) -> Tuple[np.ndarray, np.ndarray]:
        """(values, labels) of one split."""
        idx = self.split_indices(name)
        return self.values[idx], self.labels[idx].astype(np.int64)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels.astype(np.int64), minlength=len(self.catalog))

    def equals(self, other: 'PatchSet') -> bool:
        return (
            self.catalog == other.catalog
            and self.channels == other.channels
            and self.seed == other.seed
            and self.values.tobytes() == other.values.tobytes()
            and self.labels.tobytes() == other.labels.tobytes()
            and self.splits.tobytes() == other.splits.tobytes()
            and np.array_equal(self.origins, other.origins)
        )

    @classmethod
    def from_patches(
        cls,
        patches: Sequence[Patch],
        catalog: ClassCatalog,
        channels: Sequence[ChannelDesc],
        splits: Optional[np.ndarray] = None,
        seed: int = 0,
    ) -> 'PatchSet':
        count = len(patches)
        if count:
            values = np.stack([p.values for p in patches])
        else:
            values = np.zeros((0, PATCH_SIZE, PATCH_SIZE, len(channels)), dtype=np.float32)
        return cls(
            values=values,
            labels=np.array([p.label_index for p in patches], dtype=np.uint16),
            splits=np.zeros(count, dtype=np.uint8) if splits is None else splits,
            catalog=catalog,
            channels=list(channels),
            seed=seed,
            origins=np.array([p.source_xy for p in patches], dtype=np.int64).reshape(count, 2),
        )
