"""
Tests for dense map prediction and map images.
"""
import numpy as np
import pytest

from src.core.errors import CompatibilityError, FormatError, ShapeError
from src.features.map_prediction import MapRepository, MapService, interior_agreement, predict_map, render_classes
from src.features.network import Model, ModelRepository, predict
from src.features.raster_core.repository import RasterRepository
from src.models.evaluation import CLASS_PALETTE, ClassMap
from src.models.network import ArchitectureDescriptor
from src.models.raster import BASELINE_CHANNELS, NODATA_LABEL, LabelRaster, RasterStack


def _stack(size, seed=0, constant=False):
    data = np.random.default_rng(seed).normal(size=(13, size, size))
    if constant:
        data = np.ones((13, size, size))
    return RasterStack(size, size, list(BASELINE_CHANNELS), data)


@pytest.fixture
def model(baseline_descriptor):
    """Return an untrained 13-channel classifier."""
    return Model.initialize(baseline_descriptor, seed=0)


class TestPredictMap:
    """Test cases for window-by-window classification."""

    def test_five_by_five(self, model):
        """Test that a 5x5 stack gets a 3x3 interior and a sentinel border."""
        class_map = predict_map(model, _stack(5))
        assert class_map.classes.shape == (5, 5)
        assert np.sum(class_map.classes == NODATA_LABEL) == 16
        assert np.all(class_map.classes[1:4, 1:4] != NODATA_LABEL)

    def test_constant_stack(self, model):
        """Test that identical windows get one class."""
        class_map = predict_map(model, _stack(6, constant=True))
        assert len(np.unique(class_map.classes[1:-1, 1:-1])) == 1

    def test_matches_window_prediction(self, model):
        """Test that a map pixel is the prediction of the window centered on it."""
        stack = _stack(7, seed=3)
        class_map = predict_map(model, stack, chunk_size=4)
        window = np.moveaxis(stack.data[:, 2:5, 3:6], 0, -1)[None]
        index, _ = predict(model, window)
        assert class_map.classes[3, 4] == index[0]

    def test_nodata_windows(self, model):
        """Test that every window touching nodata gets the sentinel."""
        stack = _stack(7)
        stack.data[4, 2, 2] = stack.nodata
        class_map = predict_map(model, stack)
        assert np.all(class_map.classes[1:4, 1:4] == NODATA_LABEL)
        assert np.sum(class_map.classes != NODATA_LABEL) == 25 - 9

    def test_catalog_ids(self, baseline_descriptor, baseline_catalog):
        """Test that the map holds class ids of the model catalog."""
        model = Model.initialize(baseline_descriptor, catalog=baseline_catalog)
        class_map = predict_map(model, _stack(6))
        assert set(np.unique(class_map.classes[1:-1, 1:-1]).tolist()) <= set(baseline_catalog.ids)

    def test_channel_mismatch(self):
        """Test that the stack must have the model's channel count."""
        model = Model.initialize(ArchitectureDescriptor(12, 17))
        with pytest.raises(CompatibilityError):
            predict_map(model, _stack(5))


class TestRendering:
    """Test cases for map images and agreement."""

    def test_render(self, three_class_catalog):
        """Test palette colours by catalog index and black for unknown ids."""
        grid = np.array([[1, 3], [NODATA_LABEL, 2]])
        image = render_classes(grid, three_class_catalog)
        assert image.dtype == np.uint8
        assert tuple(image[0, 0]) == CLASS_PALETTE[0]
        assert tuple(image[0, 1]) == CLASS_PALETTE[2]
        assert tuple(image[1, 0]) == (0, 0, 0)

    def test_agreement(self, three_class_catalog):
        """Test that only pixels known on both sides are scored."""
        classes = np.full((3, 3), NODATA_LABEL, dtype=np.uint16)
        classes[1, 1] = 2
        truth = np.full((3, 3), 2)
        class_map = ClassMap(classes, three_class_catalog)
        assert interior_agreement(class_map, LabelRaster(3, 3, truth)) == 1.0
        truth[1, 1] = 3
        assert interior_agreement(class_map, LabelRaster(3, 3, truth)) == 0.0
        truth[1, 1] = NODATA_LABEL
        assert interior_agreement(class_map, LabelRaster(3, 3, truth)) == 0.0

    def test_agreement_size_mismatch(self, three_class_catalog):
        """Test that the reference must cover the map."""
        class_map = ClassMap(np.ones((3, 3), dtype=np.uint16), three_class_catalog)
        with pytest.raises(ShapeError):
            interior_agreement(class_map, LabelRaster(4, 3, np.ones((3, 4))))


class TestMapRepository:
    """Test cases for PPM files."""

    def test_ppm_round_trip(self, tmp_path, rng):
        """Test that an image reads back unchanged with a P6 header."""
        image = rng.integers(0, 256, size=(4, 5, 3)).astype(np.uint8)
        repo = MapRepository()
        repo.write_ppm(image, tmp_path / 'map.ppm')
        assert (tmp_path / 'map.ppm').read_bytes().startswith(b'P6\n5 4\n255\n')
        np.testing.assert_array_equal(repo.read_ppm(tmp_path / 'map.ppm'), image)

    def test_not_rgb(self, tmp_path):
        """Test that grey images are rejected."""
        with pytest.raises(FormatError):
            MapRepository().write_ppm(np.zeros((4, 4), dtype=np.uint8), tmp_path / 'grey.ppm')

    def test_truncated_ppm(self, tmp_path):
        """Test that short pixel data is rejected."""
        (tmp_path / 'short.ppm').write_bytes(b'P6\n2 2\n255\n' + bytes(5))
        with pytest.raises(FormatError):
            MapRepository().read_ppm(tmp_path / 'short.ppm')


class TestMapService:
    """Test cases for the file-level prediction."""

    def test_predict_to_files(self, tmp_path, fixture_spec, synthetic_rasters):
        """Test that map, images and agreement are produced."""
        stack, labels = synthetic_rasters
        model = Model.initialize(ArchitectureDescriptor(4, 3), catalog=fixture_spec.catalog)
        ModelRepository().save_model(model, tmp_path / 'model')
        raster_repo = RasterRepository()
        raster_repo.write_stack(stack, tmp_path / 'stack')
        raster_repo.write_labels(labels, tmp_path / 'labels')

        result = MapService().predict_to_files(
            tmp_path / 'model', tmp_path / 'stack', tmp_path / 'map',
            image_path=tmp_path / 'map.ppm', truth_path=tmp_path / 'labels', truth_image_path=tmp_path / 'truth.ppm',
        )
        assert 0.0 <= result.agreement <= 1.0
        written = raster_repo.read_labels(tmp_path / 'map')
        np.testing.assert_array_equal(written.labels, result.class_map.classes)
        assert MapRepository().read_ppm(tmp_path / 'truth.ppm').shape == (36, 36, 3)

    def test_embedding_checkpoint_rejected(self, tmp_path):
        """Test that maps need a classifier checkpoint."""
        model = Model.initialize(ArchitectureDescriptor(13, 17, variant='embedding'))
        ModelRepository().save_model(model, tmp_path / 'model')
        RasterRepository().write_stack(_stack(5), tmp_path / 'stack')
        with pytest.raises(CompatibilityError):
            MapService().predict_to_files(tmp_path / 'model', tmp_path / 'stack', tmp_path / 'map')
