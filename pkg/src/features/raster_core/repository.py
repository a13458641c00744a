"""
Repository layer for raster stacks and label rasters.

A raster file is a pair: <base>.json holds the header document and
<base>.bin the raw little-endian band-sequential values. Only file access
lives here; validation of contents belongs to the data model.
"""
import json
import logging
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from config.workspace import artifacts
from src.core.errors import FormatError, InputError
from src.models.raster import NODATA_LABEL, ChannelDesc, ClassCatalog, LabelRaster, RasterStack

logger = logging.getLogger(__name__)

DTYPES = {'f32le': np.dtype('<f4'), 'u16le': np.dtype('<u2')}
LAYOUT = 'BSQ'
LABEL_CHANNEL = ChannelDesc('class', 'index', 'id')


def paired_paths(path) -> Tuple[Path, Path]:
    """
    Header and data paths of a raster file.

    Args:
        path: Either file of the pair, or their common base name

    Returns:
        (header path, data path)
    """
    path = Path(path)
    if path.suffix in ('.json', '.bin'):
        path = path.with_suffix('')
    return path.with_name(path.name + '.json'), path.with_name(path.name + '.bin')


def read_header(path) -> Dict:
    """Load a JSON header document."""
    header_path = Path(path)
    if not header_path.exists():
        raise InputError(f"Header file not found: {header_path}")
    try:
        return json.loads(header_path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as exc:
        raise FormatError(f"Malformed header {header_path}: {exc}") from None


def dump_header(header: Dict) -> str:
    """Serialize a header with stable key order."""
    return json.dumps(header, indent=2) + '\n'


def read_payload(path) -> bytes:
    data_path = Path(path)
    if not data_path.exists():
        raise InputError(f"Data file not found: {data_path}")
    return data_path.read_bytes()


class RasterRepository:
    """Reads and writes stack and label raster files."""

    def write_stack(self, stack: RasterStack, path) -> Path:
        """
        Write a stack as header + BSQ float32 data.

        Args:
            stack: Stack to persist
            path: Base path (a .json/.bin suffix is stripped)

        Returns:
            Header path
        """
        header_path, data_path = paired_paths(path)
        header = {
            'width': stack.width,
            'height': stack.height,
            'channels': [c.to_dict() for c in stack.channels],
            'dtype': 'f32le',
            'layout': LAYOUT,
            'nodata': stack.nodata,
        }
        if stack.crs is not None:
            header['crs'] = stack.crs
        artifacts.write_bytes(data_path, stack.data.astype(DTYPES['f32le']).tobytes())
        artifacts.write_text(header_path, dump_header(header))
        logger.debug("Stack %dx%dx%d written to %s", stack.width, stack.height, stack.channel_count, header_path)
        return header_path

    def read_stack(self, path) -> RasterStack:
        """
        Read a stack file pair.

        Args:
            path: Base path or either file of the pair

        Returns:
            RasterStack
        """
        header_path, data_path = paired_paths(path)
        header = read_header(header_path)
        width, height, count = self._check_header(header, 'f32le', header_path)
        channels = [ChannelDesc.from_dict(c) for c in header['channels']]
        values = self._decode(read_payload(data_path), 'f32le', (count, height, width), data_path)
        logger.debug("Stack %dx%dx%d read from %s", width, height, count, header_path)
        return RasterStack(
            width=width,
            height=height,
            channels=channels,
            data=values,
            nodata=float(header['nodata']),
            crs=header.get('crs'),
        )

    def write_labels(self, labels: LabelRaster, path, catalog: Optional[ClassCatalog] = None) -> Path:
        """
        Write a label raster, embedding the class catalog when one is known.

        Args:
            labels: Label raster
            path: Base path
            catalog: Catalog to embed; defaults to the raster's own catalog

        Returns:
            Header path
        """
        header_path, data_path = paired_paths(path)
        catalog = catalog or labels.catalog
        header = {
            'width': labels.width,
            'height': labels.height,
            'channels': [LABEL_CHANNEL.to_dict()],
            'dtype': 'u16le',
            'layout': LAYOUT,
            'nodata': NODATA_LABEL,
        }
        if catalog is not None:
            header['catalog'] = catalog.to_list()
        artifacts.write_bytes(data_path, labels.labels.astype(DTYPES['u16le']).tobytes())
        artifacts.write_text(header_path, dump_header(header))
        logger.debug("Labels %dx%d written to %s", labels.width, labels.height, header_path)
        return header_path

    def read_labels(self, path) -> LabelRaster:
        """Read a label raster file pair."""
        header_path, data_path = paired_paths(path)
        header = read_header(header_path)
        width, height, count = self._check_header(header, 'u16le', header_path)
        if count != 1:
            raise FormatError(f"Label raster {header_path} must have one channel, has {count}")
        if int(header['nodata']) != NODATA_LABEL:
            raise FormatError(f"Label nodata must be {NODATA_LABEL}, got {header['nodata']}")
        values = self._decode(read_payload(data_path), 'u16le', (height, width), data_path)
        catalog = ClassCatalog.from_list(header['catalog']) if 'catalog' in header else None
        return LabelRaster(width=width, height=height, labels=values, catalog=catalog)

    def _check_header(self, header: Dict, dtype: str, where: Path) -> Tuple[int, int, int]:
        for key in ('width', 'height', 'channels', 'dtype', 'layout', 'nodata'):
            if key not in header:
                raise FormatError(f"Header {where} lacks required field {key!r}")
        if header['dtype'] not in DTYPES:
            raise FormatError(f"Unknown dtype tag {header['dtype']!r} in {where}")
        if header['dtype'] != dtype:
            raise FormatError(f"Expected dtype {dtype} in {where}, found {header['dtype']}")
        if header['layout'] != LAYOUT:
            raise FormatError(f"Unsupported layout {header['layout']!r} in {where}")
        return int(header['width']), int(header['height']), len(header['channels'])

    def _decode(self, payload: bytes, dtype: str, shape: Tuple[int, ...], where: Path) -> np.ndarray:
        expected = int(np.prod(shape)) * DTYPES[dtype].itemsize
        if len(payload) != expected:
            raise FormatError(f"{where} holds {len(payload)} bytes, header implies {expected}")
        return np.frombuffer(payload, dtype=DTYPES[dtype]).reshape(shape).copy()


def read_stack(path) -> RasterStack:
    return RasterRepository().read_stack(path)


def write_stack(stack: RasterStack, path) -> Path:
    return RasterRepository().write_stack(stack, path)


def read_labels(path) -> LabelRaster:
    return RasterRepository().read_labels(path)


def write_labels(labels: LabelRaster, path, catalog: Optional[ClassCatalog] = None) -> Path:
    return RasterRepository().write_labels(labels, path, catalog)
