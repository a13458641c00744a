"""
Raster data model: channel stacks, label rasters, class catalogs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import CatalogError, ShapeError
from src.utils.validators import validate_min_size

NODATA_LABEL = 65535
CHANNEL_KINDS = ('spectral', 'index', 'terrain')


@dataclass(frozen=True)
class ChannelDesc:
    """Name, kind and units of one raster channel, plus an optional note on its values."""

    name: str
    kind: str
    units: str = ''
    note: str = ''

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise CatalogError(f"Unknown channel kind {self.kind!r} for {self.name!r}")

    def to_dict(self) -> Dict[str, str]:
        raw = {'name': self.name, 'kind': self.kind, 'units': self.units}
        if self.note:
            raw['note'] = self.note
        return raw

    @classmethod
    def from_dict(cls, raw: Dict[str, str]) -> 'ChannelDesc':
        return cls(name=raw['name'], kind=raw['kind'], units=raw.get('units', ''), note=raw.get('note', ''))


CURVATURE_SIGN_NOTE = 'negative where elevation is a convex function of position (bowl), positive on a dome'

# Stack order of the 13-channel baseline input
BASELINE_CHANNELS: Tuple[ChannelDesc, ...] = (
    ChannelDesc('blue', 'spectral', 'reflectance'),
    ChannelDesc('green', 'spectral', 'reflectance'),
    ChannelDesc('red', 'spectral', 'reflectance'),
    ChannelDesc('nir', 'spectral', 'reflectance'),
    ChannelDesc('swir1', 'spectral', 'reflectance'),
    ChannelDesc('swir2', 'spectral', 'reflectance'),
    ChannelDesc('ndvi', 'index', 'ratio'),
    ChannelDesc('ndwi', 'index', 'ratio'),
    ChannelDesc('dem', 'terrain', 'm'),
    ChannelDesc('slope', 'terrain', 'degrees'),
    ChannelDesc('aspect', 'terrain', 'degrees'),
    ChannelDesc('tangential_curvature', 'terrain', '1/m', CURVATURE_SIGN_NOTE),
    ChannelDesc('profile_curvature', 'terrain', '1/m', CURVATURE_SIGN_NOTE),
)
SPECTRAL_BAND_NAMES = tuple(c.name for c in BASELINE_CHANNELS if c.kind == 'spectral')
BASELINE_BY_NAME = {c.name: c for c in BASELINE_CHANNELS}


def nodata_mask(values: np.ndarray, nodata: float) -> np.ndarray:
    """Boolean mask of nodata cells (NaN-aware)."""
    if np.isnan(nodata):
        return np.isnan(values)
    return values == nodata


@dataclass
class RasterStack:
    """
    Multi-channel raster in band-sequential layout.

    data has shape (channels, height, width), 32-bit floats.
    """

    width: int
    height: int
    channels: List[ChannelDesc]
    data: np.ndarray
    nodata: float = -9999.0
    crs: Optional[str] = None

    def __post_init__(self):
        validate_min_size(self.width, self.height)
        self.data = np.asarray(self.data, dtype=np.float32)
        expected = (len(self.channels), self.height, self.width)
        if self.data.shape != expected:
            raise ShapeError(f"Stack data shape {self.data.shape} does not match {expected}")
        names = [c.name for c in self.channels]
        if len(set(names)) != len(names):
            raise CatalogError(f"Duplicate channel names in {names}")

    @property
    def channel_names(self) -> List[str]:
        return [c.name for c in self.channels]

    @property
    def channel_count(self) -> int:
        return len(self.channels)

    def channel(self, name: str) -> np.ndarray:
        """Return one channel grid (height, width) by name."""
        try:
            return self.data[self.channel_names.index(name)]
        except ValueError:
            raise CatalogError(f"Channel {name!r} not in stack {self.channel_names}") from None

    def valid_mask(self) -> np.ndarray:
        """Pixels where no channel holds nodata."""
        return ~nodata_mask(self.data, self.nodata).any(axis=0)

    def equals(self, other: 'RasterStack') -> bool:
        """Bit-exact equality including metadata."""
        same_nodata = (self.nodata == other.nodata) or (np.isnan(self.nodata) and np.isnan(other.nodata))
        return (
            self.width == other.width
            and self.height == other.height
            and self.channels == other.channels
            and same_nodata
            and self.crs == other.crs
            and self.data.tobytes() == other.data.tobytes()
        )


@dataclass(frozen=True)
class ClassEntry:
    """One class of a catalog; code is the group label for merged classes."""

    index: int
    id: int
    name: str
    code: str = ''

    @property
    def label(self) -> str:
        return self.code if self.code else str(self.id)


@dataclass(frozen=True)
class ClassCatalog:
    """Ordered class list mapping contiguous indices to class ids."""

    entries: Tuple[ClassEntry, ...]

    def __post_init__(self):
        indices = [e.index for e in self.entries]
        if indices != list(range(len(self.entries))):
            raise CatalogError(f"Catalog indices must be contiguous from 0, got {indices}")
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise CatalogError(f"Catalog ids must be unique, got {ids}")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def ids(self) -> List[int]:
        return [e.id for e in self.entries]

    @property
    def names(self) -> List[str]:
        return [e.name for e in self.entries]

    @property
    def labels(self) -> List[str]:
        return [e.label for e in self.entries]

    def contains_id(self, class_id: int) -> bool:
        return class_id in self.ids

    def index_of(self, class_id: int) -> int:
        """Index of a class id."""
        for entry in self.entries:
            if entry.id == class_id:
                return entry.index
        raise CatalogError(f"Class id {class_id} not in catalog")

    def entry_for_id(self, class_id: int) -> ClassEntry:
        return self.entries[self.index_of(class_id)]

    def id_lookup(self) -> np.ndarray:
        """Array mapping index -> class id."""
        return np.array(self.ids, dtype=np.int64)

    def to_list(self) -> List[Dict]:
        rows = []
        for e in self.entries:
            row = {'index': e.index, 'id': e.id, 'name': e.name}
            if e.code:
                row['code'] = e.code
            rows.append(row)
        return rows

    @classmethod
    def from_list(cls, rows: Iterable[Dict]) -> 'ClassCatalog':
        return cls(tuple(
            ClassEntry(int(r['index']), int(r['id']), str(r['name']), str(r.get('code', '')))
            for r in rows
        ))

    @classmethod
    def from_ids(cls, ids: Sequence[int], names: Optional[Sequence[str]] = None) -> 'ClassCatalog':
        """Build a catalog from class ids in index order."""
        names = list(names) if names is not None else [f"class {i}" for i in ids]
        if len(names) != len(ids):
            raise CatalogError("ids and names differ in length")
        return cls(tuple(ClassEntry(i, int(cid), name) for i, (cid, name) in enumerate(zip(ids, names))))

    @classmethod
    def baseline(cls) -> 'ClassCatalog':
        """The 17-class land cover / land use catalog."""
        return cls.from_ids([cid for cid, _ in BASELINE_CLASSES], [name for _, name in BASELINE_CLASSES])


BASELINE_CLASSES: Tuple[Tuple[int, str], ...] = (
    (32, 'Water'),
    (2, 'Coniferous forest'),
    (1, 'Upland coniferous forest'),
    (3, 'Oak forest and riparian forest'),
    (7, 'Cloud forest and low evergreen forest'),
    (9, 'Mangrove and peten'),
    (15, 'Crassicaule schrub'),
    (5, 'Mezquital and submontane shrub'),
    (34, 'Cultivated and induced grasslands'),
    (28, 'Natural grasslands'),
    (12, 'Tropical dry forest'),
    (13, 'Tropical semideciduous forest'),
    (31, 'Bare land'),
    (29, 'Rain fed agriculture'),
    (35, 'Cropland irrigated'),
    (30, 'Urban areas'),
    (26, 'Hydrophilic halophilic vegetation'),
)


@dataclass
class LabelRaster:
    """Grid of class ids (height, width), uint16 with NODATA_LABEL sentinel."""

    width: int
    height: int
    labels: np.ndarray
    catalog: Optional[ClassCatalog] = None
    nodata_label: int = field(default=NODATA_LABEL)

    def __post_init__(self):
        validate_min_size(self.width, self.height)
        self.labels = np.asarray(self.labels, dtype=np.uint16)
        if self.labels.shape != (self.height, self.width):
            raise ShapeError(f"Label shape {self.labels.shape} does not match {(self.height, self.width)}")
        if self.catalog is not None:
            present = np.unique(self.labels[self.labels != self.nodata_label])
            unknown = sorted(set(present.tolist()) - set(self.catalog.ids))
            if unknown:
                raise CatalogError(f"Labels {unknown} are not in the class catalog")

    def equals(self, other: 'LabelRaster') -> bool:
        return (
            self.width == other.width
            and self.height == other.height
            and self.catalog == other.catalog
            and self.labels.tobytes() == other.labels.tobytes()
        )


@dataclass
class NormalizationParams:
    """Per-channel z-score parameters; std is strictly positive."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.std = np.asarray(self.std, dtype=np.float64)
        if self.mean.shape != self.std.shape or self.mean.ndim != 1:
            raise ShapeError("mean and std must be 1-D arrays of equal length")
        if np.any(self.std <= 0):
            raise ShapeError("standard deviations must be strictly positive")

    def __len__(self) -> int:
        return len(self.mean)

    @classmethod
    def identity(cls, channels: int) -> 'NormalizationParams':
        return cls(np.zeros(channels), np.ones(channels))


@dataclass
class DemGrid:
    """Elevation grid in meters with square cells."""

    elevation: np.ndarray
    cell_size: float = 30.0

    def __post_init__(self):
        self.elevation = np.asarray(self.elevation, dtype=np.float64)
        if self.elevation.ndim != 2:
            raise ShapeError("DEM must be a 2-D grid")
        if not self.cell_size > 0:
            raise ShapeError(f"cell_size must be positive, got {self.cell_size}")
        validate_min_size(self.width, self.height)

    @property
    def height(self) -> int:
        return self.elevation.shape[0]

    @property
    def width(self) -> int:
        return self.elevation.shape[1]
