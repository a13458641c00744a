"""
Repository layer for predicted maps and their renderings.
"""
import logging
from pathlib import Path

import numpy as np

from config.workspace import artifacts
from src.core.errors import FormatError, InputError
from src.features.raster_core.repository import RasterRepository
from src.models.evaluation import ClassMap
from src.models.raster import LabelRaster

logger = logging.getLogger(__name__)


class MapRepository:
    """Writes class maps (label raster format) and binary PPM images."""

    def __init__(self, raster_repo: RasterRepository = None) -> None:
        self.raster_repo = raster_repo or RasterRepository()

    def write_class_map(self, class_map: ClassMap, path) -> Path:
        labels = LabelRaster(class_map.width, class_map.height, class_map.classes, catalog=class_map.catalog)
        return self.raster_repo.write_labels(labels, path)

    def write_ppm(self, image: np.ndarray, path) -> Path:
        """
        Write an RGB uint8 image as a P6 portable pixmap.

        Args:
            image: (height, width, 3) array
            path: Output path

        Returns:
            Path written
        """
        if image.ndim != 3 or image.shape[2] != 3:
            raise FormatError(f"Expected an RGB image, got shape {image.shape}")
        height, width, _ = image.shape
        header = f"P6\n{width} {height}\n255\n".encode('ascii')
        artifacts.write_bytes(path, header + image.astype(np.uint8).tobytes())
        logger.debug("Image %dx%d written to %s", width, height, path)
        return Path(path)

    def read_ppm(self, path) -> np.ndarray:
        """Read a P6 pixmap written by write_ppm."""
        if not Path(path).exists():
            raise InputError(f"Image not found: {path}")
        payload = Path(path).read_bytes()
        parts = payload.split(b'\n', 3)
        if len(parts) != 4 or parts[0] != b'P6' or parts[2] != b'255':
            raise FormatError(f"{path} is not a P6 pixmap with maxval 255")
        width, height = (int(v) for v in parts[1].split())
        pixels = np.frombuffer(parts[3], dtype=np.uint8)
        if pixels.size != width * height * 3:
            raise FormatError(f"{path} pixel data does not match {width}x{height}")
        return pixels.reshape(height, width, 3).copy()
