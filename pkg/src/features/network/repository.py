"""
Repository layer for model checkpoints and training history.

A checkpoint is <base>.json (descriptor, tensor manifest, catalog,
normalization) plus <base>.bin, a little-endian float32 blob.
"""
import logging
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from config.workspace import artifacts
from src.core.errors import CompatibilityError, FormatError
from src.features.network.model import Model
from src.features.raster_core.repository import dump_header, paired_paths, read_header, read_payload
from src.models.network import ArchitectureDescriptor, TrainingHistory
from src.models.raster import ClassCatalog, NormalizationParams

logger = logging.getLogger(__name__)

BLOB_DTYPE = np.dtype('<f4')
RUNNING_TENSORS = ('bn/running_mean', 'bn/running_var')
HISTORY_COLUMNS = ['epoch', 'train_loss', 'train_acc', 'val_loss', 'val_acc']


class ModelRepository:
    """Reads and writes checkpoints."""

    def save_model(self, model: Model, path) -> Path:
        """
        Write a checkpoint.

        Args:
            model: Model to persist
            path: Base path

        Returns:
            Header path
        """
        header_path, data_path = paired_paths(path)
        tensors = list(model.parameters.items()) + [
            (RUNNING_TENSORS[0], model.running_mean),
            (RUNNING_TENSORS[1], model.running_var),
        ]
        manifest, chunks, offset = [], [], 0
        for name, value in tensors:
            raw = np.asarray(value).astype(BLOB_DTYPE).tobytes()
            manifest.append({'name': name, 'shape': list(value.shape), 'offset': offset})
            chunks.append(raw)
            offset += len(raw)

        header = {
            'descriptor': model.descriptor.to_dict(),
            'cosine_scale': model.cosine_scale,
            'bn_momentum': model.bn_momentum,
            'tensors': manifest,
            'catalog': model.catalog.to_list() if model.catalog is not None else None,
            'normalization': None if model.normalization is None else {
                'mean': model.normalization.mean.tolist(),
                'std': model.normalization.std.tolist(),
            },
        }
        artifacts.write_bytes(data_path, b''.join(chunks))
        artifacts.write_text(header_path, dump_header(header))
        logger.debug("Checkpoint with %d tensors written to %s", len(manifest), header_path)
        return header_path

    def load_model(
        self,
        path,
        variant: Optional[str] = None,
        descriptor: Optional[ArchitectureDescriptor] = None,
    ) -> Model:
        """
        Read a checkpoint, optionally checking it against an expected architecture.

        Args:
            path: Base path or either file of the pair
            variant: Required network variant
            descriptor: Required full architecture

        Returns:
            Model in eval mode
        """
        header_path, data_path = paired_paths(path)
        header = read_header(header_path)
        for key in ('descriptor', 'tensors'):
            if key not in header:
                raise FormatError(f"Checkpoint header {header_path} lacks {key!r}")
        stored = ArchitectureDescriptor.from_dict(header['descriptor'])
        if variant is not None and stored.variant != variant:
            raise CompatibilityError(f"Checkpoint holds a {stored.variant} model, {variant} was requested")
        if descriptor is not None and stored != descriptor:
            raise CompatibilityError("Checkpoint architecture does not match the requested one")

        expected = [(name, tuple(shape)) for name, shape in stored.parameter_shapes()]
        width = stored.conv_widths[-1]
        expected += [(name, (width,)) for name in RUNNING_TENSORS]
        manifest = [(t['name'], tuple(t['shape'])) for t in header['tensors']]
        if manifest != expected:
            raise FormatError(f"Tensor manifest in {header_path} does not match its descriptor")

        blob = read_payload(data_path)
        total = sum(int(np.prod(shape)) for _, shape in expected) * BLOB_DTYPE.itemsize
        if len(blob) != total:
            raise FormatError(f"{data_path} holds {len(blob)} bytes, manifest implies {total}")

        values = {}
        for entry in header['tensors']:
            shape = tuple(entry['shape'])
            count = int(np.prod(shape))
            values[entry['name']] = np.frombuffer(
                blob, dtype=BLOB_DTYPE, count=count, offset=int(entry['offset'])
            ).reshape(shape).astype(np.float32)

        norm = header.get('normalization')
        catalog = header.get('catalog')
        model = Model(
            stored,
            {name: values[name] for name, _ in stored.parameter_shapes()},
            values[RUNNING_TENSORS[0]],
            values[RUNNING_TENSORS[1]],
            normalization=NormalizationParams(norm['mean'], norm['std']) if norm else None,
            catalog=ClassCatalog.from_list(catalog) if catalog else None,
            cosine_scale=float(header.get('cosine_scale', 10.0)),
            bn_momentum=float(header.get('bn_momentum', 0.99)),
        )
        logger.debug("Checkpoint read from %s", header_path)
        return model

    def write_history(self, history: TrainingHistory, path) -> Path:
        """Write per-epoch loss/accuracy rows as CSV."""
        frame = pd.DataFrame(history.as_rows(), columns=HISTORY_COLUMNS)
        with artifacts.atomic_write(path, 'w') as handle:
            frame.to_csv(handle, index=False, lineterminator='\n')
        return Path(path)


def save_model(model: Model, path) -> Path:
    return ModelRepository().save_model(model, path)


def load_model(path, variant: Optional[str] = None, descriptor: Optional[ArchitectureDescriptor] = None) -> Model:
    return ModelRepository().load_model(path, variant, descriptor)
