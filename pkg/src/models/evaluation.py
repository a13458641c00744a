"""
Evaluation data model: confusion matrices, reports, latents, class groups, maps.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from src.core.errors import CoverageError, ShapeError
from src.models.raster import NODATA_LABEL, ClassCatalog


@dataclass
class ConfusionMatrix:
    """Counts with rows = true class and columns = predicted class."""

    counts: np.ndarray
    catalog: ClassCatalog

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        k = len(self.catalog)
        if self.counts.shape != (k, k):
            raise ShapeError(f"Confusion counts {self.counts.shape} do not match {k} classes")
        if np.any(self.counts < 0):
            raise ShapeError("Confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def supports(self) -> np.ndarray:
        return self.counts.sum(axis=1)


@dataclass
class ClassReport:
    """Per-class precision/recall/F1/support plus overall scores."""

    catalog: ClassCatalog
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    accuracy: float
    macro_f1: float

    def rows(self) -> List[Dict]:
        return [
            {
                'class_index': entry.index,
                'class_id': entry.label,
                'name': entry.name,
                'precision': float(self.precision[entry.index]),
                'recall': float(self.recall[entry.index]),
                'f1': float(self.f1[entry.index]),
                'support': int(self.support[entry.index]),
            }
            for entry in self.catalog
        ]


@dataclass
class LatentSet:
    """Unit-norm latent vectors (N, D) and their class indices."""

    vectors: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.vectors.ndim != 2 or len(self.vectors) != len(self.labels):
            raise ShapeError("Latent vectors must be (N, D) with one label per vector")

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class ClassGroup:
    group_id: str
    members: Tuple[int, ...]


@dataclass(frozen=True)
class GroupMapping:
    """Groups of class ids merged into one class; other classes map to themselves."""

    groups: Tuple[ClassGroup, ...] = field(default_factory=tuple)

    def __post_init__(self):
        seen: Dict[int, str] = {}
        for group in self.groups:
            for member in group.members:
                if member in seen:
                    raise CoverageError(
                        f"Class {member} appears in both {seen[member]} and {group.group_id}"
                    )
                seen[member] = group.group_id
        ids = [g.group_id for g in self.groups]
        if len(set(ids)) != len(ids):
            raise CoverageError(f"Duplicate group ids in {ids}")

    def group(self, group_id: str) -> ClassGroup:
        for group in self.groups:
            if group.group_id == group_id:
                return group
        raise CoverageError(f"Group {group_id!r} not in mapping")

    def group_of(self, class_id: int):
        for group in self.groups:
            if class_id in group.members:
                return group
        return None

    def to_dict(self) -> Dict:
        return {'groups': [{'id': g.group_id, 'members': list(g.members)} for g in self.groups]}

    @classmethod
    def from_dict(cls, raw: Dict) -> 'GroupMapping':
        return cls(tuple(
            ClassGroup(str(g['id']), tuple(int(m) for m in g['members'])) for g in raw.get('groups', [])
        ))


REFERENCE_GROUPING = GroupMapping((
    ClassGroup('g1', (2, 3)),
    ClassGroup('g2', (34, 12)),
    ClassGroup('g3', (29, 35)),
    ClassGroup('g4', (15, 28)),
))


@dataclass
class ClassMap:
    """Dense predicted class ids (height, width); border and nodata use the sentinel."""

    classes: np.ndarray
    catalog: ClassCatalog
    sentinel: int = NODATA_LABEL

    @property
    def height(self) -> int:
        return self.classes.shape[0]

    @property
    def width(self) -> int:
        return self.classes.shape[1]


# Fixed per-class-index colours for maps and scatter plots
CLASS_PALETTE = (
    (31, 119, 180), (255, 127, 14), (44, 160, 44), (214, 39, 40), (148, 103, 189),
    (140, 86, 75), (227, 119, 194), (127, 127, 127), (188, 189, 34), (23, 190, 207),
    (174, 199, 232), (255, 187, 120), (152, 223, 138), (255, 152, 150), (197, 176, 213),
    (196, 156, 148), (247, 182, 210),
)
SENTINEL_COLOUR = (0, 0, 0)


def class_colour(index: int) -> tuple:
    """Palette entry of a class index; indices past the palette wrap around."""
    return CLASS_PALETTE[index % len(CLASS_PALETTE)]
