"""
Tests for latent extraction, class grouping and fine-grain datasets.
"""
import json

import numpy as np
import pytest

from src.core.errors import CompatibilityError, ConfigError, CoverageError, FormatError, InputError
from src.features.embedding_analysis import (
    EmbeddingRepository,
    EmbeddingService,
    apply_grouping,
    extract_latents,
    fine_grain_dataset,
    grouped_catalog,
    read_grouping,
    representative_id,
    suggest_groups,
    write_grouping,
)
from src.features.metrics import overall_accuracy, report
from src.features.network import build_model, train
from src.models.evaluation import REFERENCE_GROUPING, ClassGroup, ConfusionMatrix, GroupMapping, LatentSet
from src.models.network import TrainConfig
from src.models.raster import ClassCatalog

# Published confusion of the retrained coarse model, order 32,1,7,g1,g2,g3,g4,9,5,13,31,30,26
COARSE_COUNTS = [
    [148, 0, 0, 0, 0, 1, 0, 0, 0, 0, 2, 0, 1],
    [0, 196, 3, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 30, 155, 4, 0, 0, 0, 0, 0, 3, 0, 0, 0],
    [0, 7, 17, 128, 12, 3, 8, 0, 2, 6, 0, 1, 0],
    [0, 0, 3, 30, 88, 2, 6, 2, 2, 27, 9, 1, 0],
    [0, 0, 2, 2, 7, 115, 42, 0, 2, 0, 0, 13, 3],
    [0, 4, 0, 6, 6, 6, 158, 0, 1, 0, 0, 3, 0],
    [0, 0, 0, 0, 0, 0, 0, 190, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 2, 1, 11, 0, 168, 0, 0, 0, 11],
    [0, 0, 2, 0, 7, 0, 0, 2, 0, 191, 0, 0, 0],
    [2, 0, 0, 1, 14, 3, 2, 0, 0, 4, 126, 15, 6],
    [0, 0, 0, 0, 1, 6, 0, 1, 1, 0, 14, 166, 1],
    [2, 0, 0, 1, 1, 1, 0, 1, 17, 0, 2, 0, 175],
]

GROUPED_LABELS = ['32', 'g1', '1', '7', '9', 'g4', '5', 'g2', '13', '31', 'g3', '30', '26']


def _clustered_latents(rng, per_class=20):
    """Latents of four classes where the first two share a direction."""
    directions = np.array([
        [1.0, 0.0, 0.0, 0.0],
        [0.99, 0.1, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
    vectors = np.repeat(directions, per_class, axis=0) + rng.normal(0.0, 0.02, size=(4 * per_class, 4))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    return LatentSet(vectors=vectors, labels=np.repeat(np.arange(4), per_class))


def _embedding_config():
    return TrainConfig(learning_rate=5e-3, epochs=2, batch_size=16, bn_momentum=0.9)


class TestGroupedCatalog:
    """Test cases for merging catalog entries."""

    def test_reference_grouping(self, baseline_catalog):
        """Test that merged classes take the place of their first member."""
        merged = apply_grouping(baseline_catalog, REFERENCE_GROUPING)
        assert len(merged) == 13
        assert merged.labels == GROUPED_LABELS

    def test_representative_ids(self):
        """Test that a group is represented by the member whose text sorts first."""
        assert [representative_id(g) for g in REFERENCE_GROUPING.groups] == [2, 12, 29, 15]

    def test_group_names(self, baseline_catalog):
        """Test that a merged entry names all of its members."""
        merged, lookup = grouped_catalog(baseline_catalog, REFERENCE_GROUPING)
        assert merged.entries[1].name == 'Coniferous forest / Oak forest and riparian forest'
        assert lookup[baseline_catalog.index_of(3)] == 1

    def test_unknown_member(self, three_class_catalog):
        """Test that every member must be in the catalog."""
        with pytest.raises(CoverageError):
            apply_grouping(three_class_catalog, GroupMapping((ClassGroup('g1', (1, 99)),)))

    def test_overlapping_groups(self):
        """Test that a class belongs to at most one group."""
        with pytest.raises(CoverageError):
            GroupMapping((ClassGroup('g1', (1, 2)), ClassGroup('g2', (2, 3))))

    def test_unsupported_target(self):
        """Test that only known kinds can be regrouped."""
        with pytest.raises(TypeError):
            apply_grouping('32', REFERENCE_GROUPING)


class TestGroupedConfusion:
    """Test cases for folding a confusion matrix into groups."""

    def test_reference_grouping_of_baseline(self, baseline_confusion):
        """Test the grouped baseline matrix."""
        grouped = apply_grouping(baseline_confusion, REFERENCE_GROUPING)
        assert grouped.counts.shape == (13, 13)
        assert grouped.total == baseline_confusion.total
        assert np.trace(grouped.counts) == 2420
        np.testing.assert_array_equal(grouped.counts[1], [0, 196, 6, 51, 0, 25, 0, 57, 23, 2, 5, 0, 0])
        assert overall_accuracy(grouped) > overall_accuracy(baseline_confusion)

    def test_reference_coarse_matrix(self):
        """Test the accuracy of the retrained coarse model."""
        catalog = ClassCatalog.from_ids([32, 1, 7, 2, 12, 29, 15, 9, 5, 13, 31, 30, 26])
        cm = ConfusionMatrix(np.array(COARSE_COUNTS), catalog)
        assert cm.total == 2415
        assert report(cm).accuracy == pytest.approx(2004 / 2415)
        assert report(cm).accuracy == pytest.approx(0.83, abs=0.005)

    def test_prediction_array(self, baseline_catalog):
        """Test remapping predicted class indices."""
        remapped = apply_grouping(np.array([1, 3, 0, 8, 10]), REFERENCE_GROUPING, catalog=baseline_catalog)
        np.testing.assert_array_equal(remapped, [1, 1, 0, 7, 7])

    def test_prediction_array_needs_catalog(self):
        """Test that arrays cannot be remapped without their catalog."""
        with pytest.raises(ConfigError):
            apply_grouping(np.array([0, 1]), REFERENCE_GROUPING)


class TestGroupedPatchSet:
    """Test cases for coarse and fine-grain patch sets."""

    def test_coarse_labels(self, small_patchset):
        """Test that grouped patches keep values and splits."""
        grouped = apply_grouping(small_patchset, GroupMapping((ClassGroup('g1', (1, 3)),)))
        assert grouped.catalog.labels == ['g1', '2']
        np.testing.assert_array_equal(grouped.labels == 0, small_patchset.labels != 1)
        np.testing.assert_array_equal(grouped.splits, small_patchset.splits)
        assert grouped.values.tobytes() == small_patchset.values.tobytes()

    def test_fine_grain_dataset(self, small_patchset):
        """Test the two-class subset of a group."""
        binary = fine_grain_dataset(small_patchset, ClassGroup('g1', (2, 1)))
        assert binary.catalog.ids == [1, 2]
        keep = small_patchset.labels < 2
        assert len(binary) == int(keep.sum())
        np.testing.assert_array_equal(binary.labels, small_patchset.labels[keep])
        np.testing.assert_array_equal(binary.splits, small_patchset.splits[keep])

    def test_fine_grain_needs_pair(self, small_patchset):
        """Test that fine-grain sets come from two-class groups."""
        with pytest.raises(ConfigError):
            fine_grain_dataset(small_patchset, ClassGroup('g1', (1, 2, 3)))


class TestSuggestGroups:
    """Test cases for the class-similarity ranking."""

    def test_close_classes_are_grouped(self, rng):
        """Test that the two classes sharing a direction form the only group."""
        catalog = ClassCatalog.from_ids([5, 7, 9, 11])
        suggestion = suggest_groups(_clustered_latents(rng), catalog, threshold=0.1)
        assert [g.members for g in suggestion.mapping.groups] == [(5, 7)]
        assert (suggestion.pairs[0]['class_a'], suggestion.pairs[0]['class_b']) == (5, 7)
        assert len(suggestion.pairs) == 6
        distances = [p['distance'] for p in suggestion.pairs]
        assert distances == sorted(distances)

    def test_order_of_latents_is_irrelevant(self, rng):
        """Test that shuffling the latent set does not change the ranking."""
        catalog = ClassCatalog.from_ids([5, 7, 9, 11])
        latents = _clustered_latents(rng)
        order = rng.permutation(len(latents))
        shuffled = LatentSet(vectors=latents.vectors[order], labels=latents.labels[order])
        assert suggest_groups(latents, catalog).pairs == suggest_groups(shuffled, catalog).pairs

    def test_missing_class(self, rng):
        """Test that every class needs latents."""
        latents = _clustered_latents(rng)
        catalog = ClassCatalog.from_ids([5, 7, 9, 11, 13])
        with pytest.raises(CoverageError):
            suggest_groups(latents, catalog)


class TestLatents:
    """Test cases for latent extraction."""

    def test_classifier_is_rejected(self, small_patchset):
        """Test that latents come from the embedding variant only."""
        with pytest.raises(CompatibilityError):
            extract_latents(build_model(small_patchset), small_patchset)

    def test_unit_vectors(self, small_patchset):
        """Test that exported latents are unit vectors of the test split."""
        model, _ = train(build_model(small_patchset, variant='embedding'), small_patchset, _embedding_config())
        latents = extract_latents(model, small_patchset, 'test')
        assert len(latents) == len(small_patchset.split_indices('test'))
        np.testing.assert_allclose(np.linalg.norm(latents.vectors, axis=1), 1.0, atol=1e-5)
        assert len(extract_latents(model, small_patchset, None)) == len(small_patchset)


class TestEmbeddingRepository:
    """Test cases for latent, plot and grouping files."""

    def test_latents_round_trip(self, tmp_path, rng):
        """Test the latent CSV."""
        repo = EmbeddingRepository()
        latents = _clustered_latents(rng, per_class=3)
        repo.write_latents_csv(latents, tmp_path / 'latents.csv')
        restored = repo.read_latents_csv(tmp_path / 'latents.csv')
        np.testing.assert_array_equal(restored.labels, latents.labels)
        np.testing.assert_allclose(restored.vectors, latents.vectors, rtol=1e-12)

    def test_latents_need_labels(self, tmp_path):
        """Test that a CSV without labels is rejected."""
        (tmp_path / 'bad.csv').write_text('v0,v1\n0.1,0.2\n')
        with pytest.raises(FormatError):
            EmbeddingRepository().read_latents_csv(tmp_path / 'bad.csv')

    def test_scatter_is_reproducible(self, tmp_path, rng):
        """Test that identical inputs give identical SVG bytes."""
        repo = EmbeddingRepository()
        coordinates = rng.normal(size=(30, 2))
        labels = np.repeat(np.arange(3), 10)
        repo.write_scatter_svg(coordinates, labels, tmp_path / 'a.svg')
        repo.write_scatter_svg(coordinates, labels, tmp_path / 'b.svg')
        assert (tmp_path / 'a.svg').read_bytes() == (tmp_path / 'b.svg').read_bytes()

    def test_grouping_round_trip(self, tmp_path):
        """Test the grouping document."""
        write_grouping(REFERENCE_GROUPING, tmp_path / 'groups.json')
        assert read_grouping(tmp_path / 'groups.json') == REFERENCE_GROUPING

    def test_malformed_grouping(self, tmp_path):
        """Test documents without ids or groups."""
        (tmp_path / 'a.json').write_text(json.dumps({'groups': [{'members': [1, 2]}]}))
        (tmp_path / 'b.json').write_text(json.dumps({'pairs': []}))
        for name in ('a.json', 'b.json'):
            with pytest.raises(FormatError):
                read_grouping(tmp_path / name)

    def test_missing_grouping(self, tmp_path):
        """Test reading a document that does not exist."""
        with pytest.raises(InputError):
            read_grouping(tmp_path / 'absent.json')

    def test_service_writes_pairs(self, tmp_path, rng):
        """Test that suggestions are written with their ranked pairs."""
        catalog = ClassCatalog.from_ids([5, 7, 9, 11])
        EmbeddingService().suggest(_clustered_latents(rng), catalog, 0.1, tmp_path / 'groups.json')
        document = json.loads((tmp_path / 'groups.json').read_text())
        assert document['groups'] == [{'id': 'g1', 'members': [5, 7]}]
        assert len(document['pairs']) == 6
