"""
Repository layer for embedding analysis artifacts.

Latent and t-SNE CSV files, the scatter plot SVG and group mapping
documents.
"""
import io
import logging
from pathlib import Path
from typing import Dict, List, Optional

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from config.workspace import artifacts  # noqa: E402
from src.core.errors import FormatError, InputError, ToolkitError  # noqa: E402
from src.features.raster_core.repository import dump_header, read_header  # noqa: E402
from src.models.evaluation import GroupMapping, LatentSet, class_colour  # noqa: E402
from src.models.raster import ClassCatalog  # noqa: E402

logger = logging.getLogger(__name__)

SVG_HASH_SALT = 'lulc-toolkit'


class EmbeddingRepository:
    """Reads and writes latent, projection and grouping files."""

    def write_latents_csv(self, latents: LatentSet, path) -> Path:
        """Columns label_index, v0 .. v{D-1}."""
        frame = pd.DataFrame(latents.vectors, columns=[f"v{i}" for i in range(latents.vectors.shape[1])])
        frame.insert(0, 'label_index', latents.labels)
        with artifacts.atomic_write(path, 'w') as handle:
            frame.to_csv(handle, index=False, lineterminator='\n')
        logger.debug("Latents (%d) written to %s", len(latents), path)
        return Path(path)

    def read_latents_csv(self, path) -> LatentSet:
        if not Path(path).exists():
            raise InputError(f"Latents file not found: {path}")
        frame = pd.read_csv(path)
        if 'label_index' not in frame.columns:
            raise FormatError(f"{path} lacks a label_index column")
        vectors = frame.drop(columns='label_index').to_numpy(dtype=np.float64)
        return LatentSet(vectors=vectors, labels=frame['label_index'].to_numpy(dtype=np.int64))

    def write_tsne_csv(self, coordinates: np.ndarray, labels: np.ndarray, path) -> Path:
        """Columns label_index, x, y."""
        frame = pd.DataFrame({'label_index': labels, 'x': coordinates[:, 0], 'y': coordinates[:, 1]})
        with artifacts.atomic_write(path, 'w') as handle:
            frame.to_csv(handle, index=False, lineterminator='\n')
        return Path(path)

    def write_scatter_svg(
        self,
        coordinates: np.ndarray,
        labels: np.ndarray,
        path,
        catalog: Optional[ClassCatalog] = None,
    ) -> Path:
        """
        Scatter plot of 2-D coordinates coloured by class index.

        The SVG carries no date and uses a fixed hash salt, so identical
        inputs give identical bytes.
        """
        with plt.rc_context({'svg.hashsalt': SVG_HASH_SALT}):
            fig, ax = plt.subplots(figsize=(6, 6))
            for index in np.unique(labels):
                points = coordinates[labels == index]
                rgb = tuple(c / 255.0 for c in class_colour(int(index)))
                name = catalog.labels[int(index)] if catalog is not None and index < len(catalog) else str(index)
                ax.scatter(points[:, 0], points[:, 1], s=6, color=rgb, label=name)
            ax.set_xticks([])
            ax.set_yticks([])
            ax.legend(loc='best', fontsize=6, markerscale=2)
            buffer = io.BytesIO()
            fig.savefig(buffer, format='svg', metadata={'Date': None})
            plt.close(fig)
        artifacts.write_bytes(path, buffer.getvalue())
        logger.debug("Scatter plot written to %s", path)
        return Path(path)

    def write_grouping(self, mapping: GroupMapping, path, pairs: Optional[List[Dict]] = None) -> Path:
        """Group mapping document, optionally with ranked pair distances."""
        document = mapping.to_dict()
        if pairs is not None:
            document['pairs'] = pairs
        artifacts.write_text(path, dump_header(document))
        return Path(path)

    def read_grouping(self, path) -> GroupMapping:
        document = read_header(path)
        if 'groups' not in document:
            raise FormatError(f"Grouping document {path} lacks 'groups'")
        try:
            return GroupMapping.from_dict(document)
        except ToolkitError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"Malformed grouping document {path}: {exc}") from None


def read_grouping(path) -> GroupMapping:
    return EmbeddingRepository().read_grouping(path)


def write_grouping(mapping: GroupMapping, path) -> Path:
    return EmbeddingRepository().write_grouping(mapping, path)
