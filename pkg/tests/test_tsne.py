"""
Tests for the t-SNE projection.
"""
import numpy as np
import pytest
from sklearn.metrics import silhouette_score

from src.core.errors import ConfigError, DataError, NumericError
from src.features.embedding_analysis import (
    EmbeddingService,
    conditional_affinities,
    joint_affinities,
    row_perplexities,
    tsne,
)
from src.models.evaluation import LatentSet


def _blobs(per_blob=100, dims=10, seed=0):
    rng = np.random.default_rng(seed)
    centers = np.zeros((3, dims))
    centers[0, 0] = centers[1, 1] = centers[2, 2] = 10.0
    labels = np.repeat(np.arange(3), per_blob)
    return centers[labels] + rng.normal(size=(len(labels), dims)), labels


class TestAffinities:
    """Test cases for the input affinities."""

    def test_row_perplexity(self):
        """Test that every row reaches the target perplexity."""
        vectors, _ = _blobs(per_blob=40)
        conditional = conditional_affinities(vectors, perplexity=20.0)
        np.testing.assert_allclose(row_perplexities(conditional), 20.0, rtol=1e-3)
        np.testing.assert_allclose(conditional.sum(axis=1), 1.0)
        assert np.all(np.diag(conditional) == 0.0)

    def test_joint_is_symmetric(self):
        """Test that joint affinities are symmetric and sum to one."""
        vectors, _ = _blobs(per_blob=20)
        p = joint_affinities(vectors, perplexity=10.0)
        np.testing.assert_allclose(p, p.T)
        assert p.sum() == pytest.approx(1.0)

    def test_too_few_points(self):
        """Test that the sample must exceed three times the perplexity."""
        with pytest.raises(DataError):
            conditional_affinities(np.random.default_rng(0).normal(size=(30, 4)), perplexity=30.0)

    def test_non_finite_input(self):
        """Test that NaN inputs are rejected."""
        vectors = np.ones((20, 3))
        vectors[4, 1] = np.nan
        with pytest.raises(NumericError):
            conditional_affinities(vectors, perplexity=5.0)


class TestTsne:
    """Test cases for the 2-D embedding."""

    def test_separates_blobs(self):
        """Test that three separated clusters stay separated in 2-D."""
        vectors, labels = _blobs()
        result = tsne(vectors, perplexity=30.0, iterations=500, seed=0)
        assert result.coordinates.shape == (300, 2)
        assert silhouette_score(result.coordinates, labels) > 0.5

    def test_two_tight_blobs_are_linearly_separable(self):
        """Test that two tight blobs land on opposite sides of a line."""
        rng = np.random.default_rng(2)
        centers = np.zeros((2, 5))
        centers[1, 0] = 10.0
        labels = np.repeat([0, 1], 60)
        vectors = centers[labels] + rng.normal(0.0, 0.01, size=(120, 5))
        coords = tsne(vectors, iterations=400, seed=0).coordinates
        direction = coords[labels == 1].mean(axis=0) - coords[labels == 0].mean(axis=0)
        projected = coords @ direction
        assert projected[labels == 0].max() < projected[labels == 1].min()

    def test_divergence_after_exaggeration(self):
        """Test that the final KL divergence is below the value at iteration 300."""
        vectors, _ = _blobs(per_blob=25)
        result = tsne(vectors, perplexity=10.0, seed=0)
        assert len(result.kl_divergence) == 1000
        assert result.kl_divergence[-1] < result.kl_divergence[299]

    def test_divergence_decreases(self):
        """Test that the final KL divergence is below the initial one."""
        vectors, _ = _blobs(per_blob=30)
        result = tsne(vectors, perplexity=10.0, iterations=300, seed=1)
        assert len(result.kl_divergence) == 300
        assert result.kl_divergence[-1] < result.kl_divergence[0]

    def test_seeded(self):
        """Test that equal seeds give equal coordinates."""
        vectors, _ = _blobs(per_blob=20)
        first = tsne(vectors, perplexity=10.0, iterations=100, seed=3)
        second = tsne(vectors, perplexity=10.0, iterations=100, seed=3)
        np.testing.assert_array_equal(first.coordinates, second.coordinates)

    def test_centered(self):
        """Test that coordinates stay centered."""
        vectors, _ = _blobs(per_blob=20)
        result = tsne(vectors, perplexity=10.0, iterations=100, seed=0)
        np.testing.assert_allclose(result.coordinates.mean(axis=0), 0.0, atol=1e-9)

    def test_rejects_no_iterations(self):
        """Test that the optimizer needs at least one step and a positive rate."""
        vectors, _ = _blobs(per_blob=10)
        with pytest.raises(ConfigError):
            tsne(vectors, perplexity=5.0, iterations=0)
        with pytest.raises(ConfigError):
            tsne(vectors, perplexity=5.0, iterations=10, learning_rate=0.0)

    def test_service_writes_files(self, tmp_path):
        """Test the projection CSV and scatter plot."""
        vectors, labels = _blobs(per_blob=20)
        latents = LatentSet(vectors=vectors, labels=labels)
        EmbeddingService().project(
            latents, tmp_path / 'tsne.csv', tmp_path / 'tsne.svg', perplexity=10.0, iterations=50
        )
        lines = (tmp_path / 'tsne.csv').read_text().splitlines()
        assert lines[0] == 'label_index,x,y'
        assert len(lines) == 61
        assert (tmp_path / 'tsne.svg').read_text().lstrip().startswith('<?xml')
