"""
Tests for confusion matrices and classification reports.
"""
from unittest.mock import Mock

import numpy as np
import pytest
from sklearn.metrics import confusion_matrix, precision_recall_fscore_support

from src.core.errors import EmptySampleError, FormatError, InputError, LabelError
from src.features.metrics import (
    MetricsRepository,
    MetricsService,
    confusion,
    format_report_table,
    overall_accuracy,
    read_confusion_csv,
    report,
    worst_classes,
)
from src.features.network import build_model, train
from src.models.evaluation import ConfusionMatrix
from src.models.network import TrainConfig
from src.models.raster import ClassCatalog
from tests.conftest import BASELINE_REPORT

# Fine-grain confusion of the coniferous / oak-riparian pair (ids 2, 3)
FINE_GRAIN_PAIR = [[118, 66], [46, 142]]


class TestConfusion:
    """Test cases for counting."""

    def test_counts(self, three_class_catalog):
        """Test rows are true classes and columns predictions."""
        cm = confusion([0, 0, 1, 2, 2, 2], [0, 1, 1, 2, 2, 0], three_class_catalog)
        np.testing.assert_array_equal(cm.counts, [[1, 1, 0], [0, 1, 0], [1, 0, 2]])
        assert cm.total == 6

    def test_matches_sklearn(self, rng, three_class_catalog):
        """Test counts against scikit-learn."""
        truth = rng.integers(0, 3, size=200)
        predicted = rng.integers(0, 3, size=200)
        cm = confusion(truth, predicted, three_class_catalog)
        np.testing.assert_array_equal(cm.counts, confusion_matrix(truth, predicted, labels=[0, 1, 2]))

    def test_label_outside_catalog(self, three_class_catalog):
        """Test that indices past the catalog are rejected."""
        with pytest.raises(LabelError):
            confusion([0, 3], [0, 1], three_class_catalog)
        with pytest.raises(LabelError):
            confusion([0, 1], [-1, 1], three_class_catalog)


class TestReport:
    """Test cases for per-class scores."""

    def test_reference_baseline_report(self, baseline_confusion):
        """Test that the reference report is recomputed from its confusion matrix."""
        class_report = report(baseline_confusion)
        rows = {row['class_id']: row for row in class_report.rows()}
        for class_id, precision, recall, f1, support in BASELINE_REPORT:
            row = rows[str(class_id)]
            assert row['precision'] == pytest.approx(precision, abs=0.01)
            assert row['recall'] == pytest.approx(recall, abs=0.01)
            assert row['f1'] == pytest.approx(f1, abs=0.01)
            assert row['support'] == support

    def test_baseline_accuracy(self, baseline_confusion):
        """Test overall accuracy of the reference baseline matrix."""
        assert baseline_confusion.total == 3157
        assert overall_accuracy(baseline_confusion) == pytest.approx(2245 / 3157)
        assert overall_accuracy(baseline_confusion) == pytest.approx(0.711, abs=1e-3)

    def test_fine_grain_pair(self):
        """Test the report of a two-class fine-grain matrix."""
        catalog = ClassCatalog.from_ids([2, 3])
        class_report = report(ConfusionMatrix(np.array(FINE_GRAIN_PAIR), catalog))
        assert class_report.precision[0] == pytest.approx(0.72, abs=0.005)
        assert class_report.recall[0] == pytest.approx(0.64, abs=0.005)
        assert class_report.f1[0] == pytest.approx(0.68, abs=0.005)
        assert class_report.support[0] == 184
        assert class_report.accuracy == pytest.approx(0.699, abs=1e-3)

    def test_matches_sklearn(self, rng):
        """Test precision, recall and F1 against scikit-learn."""
        catalog = ClassCatalog.from_ids([10, 20, 30, 40])
        truth = rng.integers(0, 4, size=300)
        predicted = np.where(rng.random(300) < 0.7, truth, rng.integers(0, 4, size=300))
        class_report = report(confusion(truth, predicted, catalog))
        precision, recall, f1, support = precision_recall_fscore_support(truth, predicted, labels=[0, 1, 2, 3])
        np.testing.assert_allclose(class_report.precision, precision)
        np.testing.assert_allclose(class_report.recall, recall)
        np.testing.assert_allclose(class_report.f1, f1)
        np.testing.assert_array_equal(class_report.support, support)
        assert class_report.macro_f1 == pytest.approx(f1.mean())

    def test_never_predicted_class(self, three_class_catalog):
        """Test that zero denominators give zero scores."""
        class_report = report(confusion([0, 1, 2], [0, 0, 0], three_class_catalog))
        assert class_report.precision[1] == 0.0
        assert class_report.f1[2] == 0.0

    def test_empty_matrix(self, three_class_catalog):
        """Test accuracy of an empty matrix."""
        cm = ConfusionMatrix(np.zeros((3, 3)), three_class_catalog)
        with pytest.raises(EmptySampleError):
            overall_accuracy(cm)
        assert report(cm).accuracy == 0.0

    def test_worst_classes(self, baseline_confusion):
        """Test ranking by ascending F1."""
        worst = worst_classes(report(baseline_confusion), n=3)
        assert [entry.id for entry in worst] == [3, 28, 34]

    def test_table(self, three_class_catalog):
        """Test the text table layout."""
        class_report = report(confusion([0, 1, 2, 2], [0, 1, 2, 1], three_class_catalog))
        lines = format_report_table(class_report).splitlines()
        assert lines[0].split() == ['Precision', 'Recall', 'F1-score', 'Support', 'ID', 'Class']
        assert lines[1].split() == ['1.00', '1.00', '1.00', '1', '1', 'forest']
        assert lines[-2].split() == ['accuracy', '0.75', '4']
        assert len(lines) == 6


class TestMetricsRepository:
    """Test cases for metric CSV files."""

    def test_confusion_round_trip(self, tmp_path, baseline_confusion):
        """Test that a written confusion file reads back identically."""
        path = MetricsRepository().write_confusion_csv(baseline_confusion, tmp_path / 'cm.csv')
        restored = read_confusion_csv(path, baseline_confusion.catalog)
        np.testing.assert_array_equal(restored.counts, baseline_confusion.counts)
        header = path.read_text().splitlines()[0]
        assert header.startswith('true,32,2,1,3')

    def test_report_recomputed_from_file(self, tmp_path, baseline_confusion):
        """Test that the report of a re-read matrix equals the original report."""
        path = MetricsRepository().write_confusion_csv(baseline_confusion, tmp_path / 'cm.csv')
        np.testing.assert_allclose(
            report(read_confusion_csv(path, baseline_confusion.catalog)).f1, report(baseline_confusion).f1
        )

    def test_catalog_mismatch(self, tmp_path, baseline_confusion, three_class_catalog):
        """Test that the file must match the catalog."""
        path = MetricsRepository().write_confusion_csv(baseline_confusion, tmp_path / 'cm.csv')
        with pytest.raises(FormatError):
            read_confusion_csv(path, three_class_catalog)

    def test_missing_file(self, tmp_path, three_class_catalog):
        """Test reading a file that does not exist."""
        with pytest.raises(InputError):
            read_confusion_csv(tmp_path / 'absent.csv', three_class_catalog)

    def test_report_csv(self, tmp_path, baseline_confusion):
        """Test the report file ends with overall accuracy and macro F1."""
        path = MetricsRepository().write_report_csv(report(baseline_confusion), tmp_path / 'report.csv')
        lines = path.read_text().splitlines()
        assert lines[0] == 'class_index,class_id,name,precision,recall,f1,support'
        assert len(lines) == 1 + 17 + 2
        assert lines[-2].startswith(',,overall_accuracy,,,0.711')
        assert lines[-1].startswith(',,macro_f1,')


class TestMetricsService:
    """Test cases for model evaluation."""

    def test_evaluate_model(self, tmp_path, small_patchset):
        """Test that the matrix agrees with the reported accuracy and files are written."""
        config = TrainConfig(learning_rate=5e-3, epochs=3, batch_size=16, bn_momentum=0.9)
        model, _ = train(build_model(small_patchset), small_patchset, config)
        cm, class_report, _, accuracy = MetricsService().evaluate_model(
            model, small_patchset, 'test', tmp_path / 'report.csv', tmp_path / 'cm.csv'
        )
        assert cm.total == len(small_patchset.split_indices('test'))
        assert class_report.accuracy == pytest.approx(accuracy)
        assert (tmp_path / 'report.csv').exists()
        assert read_confusion_csv(tmp_path / 'cm.csv', small_patchset.catalog).total == cm.total

    def test_no_paths_writes_nothing(self, small_patchset):
        """Test that the repository is untouched without output paths."""
        mock_repo = Mock()
        model = build_model(small_patchset)
        MetricsService(mock_repo).evaluate_model(model, small_patchset, 'val')
        mock_repo.write_report_csv.assert_not_called()
        mock_repo.write_confusion_csv.assert_not_called()
