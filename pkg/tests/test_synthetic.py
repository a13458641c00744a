"""
Tests for synthetic fixtures.
"""
import numpy as np
import pytest

from src.core.errors import ConfigError
from src.features.patchset.service import extract_homogeneous
from src.features.raster_core.repository import RasterRepository
from src.features.synthetic import FixtureSpec, SyntheticService, class_means, generate_fixture, parse_pairs
from src.models.raster import BASELINE_CHANNELS


class TestFixtureSpec:
    """Test cases for fixture validation."""

    @pytest.mark.parametrize('kwargs', [
        {'num_classes': 1},
        {'tile': 4, 'width': 36, 'height': 36},
        {'width': 35},
        {'width': 6, 'height': 6, 'num_classes': 2},
        {'num_classes': 9, 'channels': 4},
        {'sigma': 0.0},
        {'separation': -1.0},
        {'confusable_pairs': [(0, 1), (1, 2)]},
        {'confusable_pairs': [(0, 4)]},
    ])
    def test_invalid(self, kwargs):
        """Test rejected geometries and statistics."""
        with pytest.raises(ConfigError):
            FixtureSpec(**kwargs)

    def test_baseline_channels(self):
        """Test that 13 channels use the baseline channel names."""
        assert FixtureSpec().channel_descs == list(BASELINE_CHANNELS)
        assert [c.name for c in FixtureSpec(channels=3).channel_descs] == ['c0', 'c1', 'c2']

    def test_catalog(self):
        """Test class ids 1..K."""
        assert FixtureSpec(num_classes=3).catalog.ids == [1, 2, 3]

    def test_parse_pairs(self):
        """Test the command-line pair syntax."""
        assert parse_pairs(['0:1', '2:3']) == [(0, 1), (2, 3)]
        assert parse_pairs(None) == []
        with pytest.raises(ConfigError):
            parse_pairs(['0-1'])


class TestClassMeans:
    """Test cases for class mean placement."""

    def test_axes(self):
        """Test that classes use one axis each, then the negative side."""
        means = class_means(FixtureSpec(num_classes=5, channels=3, separation=4.0, sigma=0.5, width=36, height=36))
        np.testing.assert_allclose(means[0], [2.0, 0.0, 0.0])
        np.testing.assert_allclose(means[2], [0.0, 0.0, 2.0])
        np.testing.assert_allclose(means[3], [-2.0, 0.0, 0.0])

    def test_confusable_pair(self):
        """Test that a pair partner copies the first mean plus the offset."""
        spec = FixtureSpec(num_classes=4, channels=4, confusable_pairs=[(0, 1)], pair_offset=0.5)
        means = class_means(spec)
        np.testing.assert_allclose(means[1], means[0] + [0.0, 0.5, 0.0, 0.0])


class TestGenerateFixture:
    """Test cases for fixture rasters."""

    def test_deterministic(self, fixture_spec):
        """Test that a seed fixes every byte."""
        first = generate_fixture(fixture_spec, seed=3)
        second = generate_fixture(fixture_spec, seed=3)
        other = generate_fixture(fixture_spec, seed=4)
        assert first[0].equals(second[0]) and first[1].equals(second[1])
        assert not first[0].equals(other[0])

    def test_tiles_are_homogeneous(self, fixture_spec, synthetic_rasters):
        """Test that every tile holds one class and every class appears."""
        _, labels = synthetic_rasters
        tile = fixture_spec.tile
        for r in range(0, fixture_spec.height, tile):
            for c in range(0, fixture_spec.width, tile):
                assert len(np.unique(labels.labels[r:r + tile, c:c + tile])) == 1
        assert set(np.unique(labels.labels).tolist()) == {1, 2, 3}

    def test_every_window_is_a_patch(self, synthetic_rasters):
        """Test that all non-overlapping windows are homogeneous patches."""
        stack, labels = synthetic_rasters
        assert len(extract_homogeneous(stack, labels, labels.catalog)) == (36 // 3) * (36 // 3)

    def test_pixel_statistics(self, fixture_spec, synthetic_rasters):
        """Test that class pixels scatter around their mean."""
        stack, labels = synthetic_rasters
        means = class_means(fixture_spec)
        for index, class_id in enumerate(fixture_spec.catalog.ids):
            pixels = stack.data[:, labels.labels == class_id]
            np.testing.assert_allclose(pixels.mean(axis=1), means[index], atol=0.25)
            assert pixels.std(axis=1).mean() == pytest.approx(fixture_spec.sigma, rel=0.15)

    def test_service_writes_files(self, tmp_path, fixture_spec):
        """Test that written fixtures read back identically."""
        stack, labels = SyntheticService().create_fixture(fixture_spec, tmp_path / 'stack', tmp_path / 'labels', seed=7)
        repo = RasterRepository()
        assert repo.read_stack(tmp_path / 'stack').equals(stack)
        assert repo.read_labels(tmp_path / 'labels').equals(labels)
