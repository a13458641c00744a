"""
Repository layer for patch set files.

Header <base>.json describes the set; <base>.bin holds float32 values,
then uint16 labels, then uint8 split tags, all little-endian.
"""
import logging
from pathlib import Path

import numpy as np

from config.workspace import artifacts
from src.core.errors import FormatError
from src.features.raster_core.repository import dump_header, paired_paths, read_header, read_payload
from src.models.patches import PATCH_SIZE, SPLIT_TAGS, PatchSet
from src.models.raster import ChannelDesc, ClassCatalog

logger = logging.getLogger(__name__)

VALUE_DTYPE = np.dtype('<f4')
LABEL_DTYPE = np.dtype('<u2')
SPLIT_DTYPE = np.dtype('u1')


class PatchSetRepository:
    """Reads and writes patch set files."""

    def write_patchset(self, patchset: PatchSet, path) -> Path:
        """
        Persist a patch set.

        Args:
            patchset: Set to write
            path: Base path (a .json/.bin suffix is stripped)

        Returns:
            Header path
        """
        header_path, data_path = paired_paths(path)
        header = {
            'count': len(patchset),
            'patch_size': PATCH_SIZE,
            'channels': [c.to_dict() for c in patchset.channels],
            'catalog': patchset.catalog.to_list(),
            'seed': int(patchset.seed),
            'split_tags': dict(SPLIT_TAGS),
            'origins': patchset.origins.tolist(),
        }
        payload = b''.join((
            patchset.values.astype(VALUE_DTYPE).tobytes(),
            patchset.labels.astype(LABEL_DTYPE).tobytes(),
            patchset.splits.astype(SPLIT_DTYPE).tobytes(),
        ))
        artifacts.write_bytes(data_path, payload)
        artifacts.write_text(header_path, dump_header(header))
        logger.debug("Patch set of %d written to %s", len(patchset), header_path)
        return header_path

    def read_patchset(self, path) -> PatchSet:
        """Read a patch set file pair."""
        header_path, data_path = paired_paths(path)
        header = read_header(header_path)
        for key in ('count', 'patch_size', 'channels', 'catalog', 'seed'):
            if key not in header:
                raise FormatError(f"Patch set header {header_path} lacks {key!r}")
        if int(header['patch_size']) != PATCH_SIZE:
            raise FormatError(f"Unsupported patch size {header['patch_size']}")
        if header.get('split_tags', SPLIT_TAGS) != SPLIT_TAGS:
            raise FormatError(f"Unknown split tag encoding {header['split_tags']}")

        count = int(header['count'])
        channels = [ChannelDesc.from_dict(c) for c in header['channels']]
        value_count = count * PATCH_SIZE * PATCH_SIZE * len(channels)
        value_bytes = value_count * VALUE_DTYPE.itemsize
        label_bytes = count * LABEL_DTYPE.itemsize
        payload = read_payload(data_path)
        expected = value_bytes + label_bytes + count * SPLIT_DTYPE.itemsize
        if len(payload) != expected:
            raise FormatError(f"{data_path} holds {len(payload)} bytes, header count {count} implies {expected}")

        origins = header.get('origins')
        if origins is not None and len(origins) != count:
            raise FormatError(f"{len(origins)} origins for {count} patches")

        values = np.frombuffer(payload, dtype=VALUE_DTYPE, count=value_count)
        labels = np.frombuffer(payload, dtype=LABEL_DTYPE, count=count, offset=value_bytes)
        splits = np.frombuffer(payload, dtype=SPLIT_DTYPE, count=count, offset=value_bytes + label_bytes)
        logger.debug("Patch set of %d read from %s", count, header_path)
        return PatchSet(
            values=values.reshape(count, PATCH_SIZE, PATCH_SIZE, len(channels)).astype(np.float32),
            labels=labels.astype(np.uint16),
            splits=splits.astype(np.uint8),
            catalog=ClassCatalog.from_list(header['catalog']),
            channels=channels,
            seed=int(header['seed']),
            origins=None if origins is None else np.array(origins, dtype=np.int64).reshape(count, 2),
        )


def read_patchset(path) -> PatchSet:
    return PatchSetRepository().read_patchset(path)


def write_patchset(patchset: PatchSet, path) -> Path:
    return PatchSetRepository().write_patchset(patchset, path)
