"""
Service layer for dense map prediction.

Every interior pixel is classified from the 3x3 window centered on it.
Border pixels and windows touching nodata get the sentinel.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from config.settings import PREDICT_CHUNK_SIZE
from src.core.errors import CompatibilityError, ShapeError
from src.features.map_prediction.repository import MapRepository
from src.features.network.model import Model
from src.features.network.repository import ModelRepository
from src.features.network.service import predict
from src.features.raster_core.repository import RasterRepository
from src.models.evaluation import SENTINEL_COLOUR, ClassMap, class_colour
from src.models.patches import PATCH_SIZE
from src.models.raster import NODATA_LABEL, ClassCatalog, LabelRaster, RasterStack

logger = logging.getLogger(__name__)


def predict_map(model: Model, stack: RasterStack, chunk_size: int = PREDICT_CHUNK_SIZE) -> ClassMap:
    """
    Classify every interior pixel of a stack.

    Args:
        model: Classifier-variant model carrying its catalog
        stack: Stack with the model's channel count
        chunk_size: Windows classified per batch

    Returns:
        ClassMap of class ids with the sentinel on the border and nodata
    """
    if stack.channel_count != model.descriptor.input_channels:
        raise CompatibilityError(
            f"Stack has {stack.channel_count} channels, model expects {model.descriptor.input_channels}"
        )
    catalog = model.catalog or ClassCatalog.from_ids(range(model.descriptor.num_classes))
    ids = catalog.id_lookup()
    model.eval()

    classes = np.full((stack.height, stack.width), NODATA_LABEL, dtype=np.uint16)
    pixels = np.moveaxis(stack.data, 0, -1)
    windows = sliding_window_view(pixels, (PATCH_SIZE, PATCH_SIZE), axis=(0, 1))
    usable = sliding_window_view(stack.valid_mask(), (PATCH_SIZE, PATCH_SIZE)).all(axis=(-2, -1))
    rows, cols = np.nonzero(usable)

    for start in range(0, len(rows), chunk_size):
        r, c = rows[start:start + chunk_size], cols[start:start + chunk_size]
        batch = np.moveaxis(windows[r, c], 1, -1)
        indices, _ = predict(model, batch)
        classes[r + 1, c + 1] = ids[indices]

    logger.info("Predicted %d of %d pixels", len(rows), stack.width * stack.height)
    return ClassMap(classes=classes, catalog=catalog)


def render_classes(class_ids: np.ndarray, catalog: ClassCatalog) -> np.ndarray:
    """
    RGB image (height, width, 3) of a class-id grid using the fixed palette.

    Ids outside the catalog, including the sentinel, are drawn black.
    """
    image = np.zeros(class_ids.shape + (3,), dtype=np.uint8)
    image[...] = SENTINEL_COLOUR
    for entry in catalog:
        image[class_ids == entry.id] = class_colour(entry.index)
    return image


def interior_agreement(class_map: ClassMap, truth: LabelRaster) -> float:
    """Fraction of predicted pixels whose truth label is known and equal."""
    if class_map.classes.shape != truth.labels.shape:
        raise ShapeError(f"Map {class_map.classes.shape} and truth {truth.labels.shape} differ in size")
    scored = (class_map.classes != class_map.sentinel) & (truth.labels != truth.nodata_label)
    if not scored.any():
        return 0.0
    return float(np.mean(class_map.classes[scored] == truth.labels[scored]))


@dataclass
class MapResult:
    class_map: ClassMap
    agreement: Optional[float] = None


class MapService:
    """Runs a checkpoint over a stack file and writes the map artifacts."""

    def __init__(
        self,
        repo: Optional[MapRepository] = None,
        model_repo: Optional[ModelRepository] = None,
        raster_repo: Optional[RasterRepository] = None,
    ) -> None:
        self.repo = repo or MapRepository()
        self.model_repo = model_repo or ModelRepository()
        self.raster_repo = raster_repo or RasterRepository()

    def predict_to_files(
        self,
        model_path,
        stack_path,
        output_path,
        image_path=None,
        truth_path=None,
        truth_image_path=None,
    ) -> MapResult:
        """
        Predict a map and write it as a label raster plus optional images.

        Args:
            model_path: Classifier checkpoint
            stack_path: Stack file
            output_path: Label raster base path for the class map
            image_path: Optional PPM rendering of the map
            truth_path: Optional reference label raster
            truth_image_path: Optional PPM rendering of the reference

        Returns:
            MapResult with the agreement when a reference was given
        """
        model = self.model_repo.load_model(model_path, variant='classifier')
        stack = self.raster_repo.read_stack(stack_path)
        class_map = predict_map(model, stack)
        self.repo.write_class_map(class_map, output_path)
        if image_path is not None:
            self.repo.write_ppm(render_classes(class_map.classes, class_map.catalog), image_path)

        agreement = None
        if truth_path is not None:
            truth = self.raster_repo.read_labels(truth_path)
            agreement = interior_agreement(class_map, truth)
            if truth_image_path is not None:
                self.repo.write_ppm(render_classes(truth.labels, class_map.catalog), truth_image_path)
            logger.info("Agreement with reference: %.4f", agreement)
        return MapResult(class_map=class_map, agreement=agreement)
