"""
Service layer for evaluation metrics.

Confusion matrices, per-class precision/recall/F1 and overall accuracy,
formatted like a classification report.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np

from src.core.errors import EmptySampleError, LabelError, ShapeError
from src.features.metrics.repository import MetricsRepository
from src.features.network.model import Model
from src.features.network.service import evaluate, predict
from src.models.evaluation import ClassReport, ConfusionMatrix
from src.models.patches import PatchSet
from src.models.raster import ClassCatalog, ClassEntry
from src.utils.formatters import format_score, truncate_text

logger = logging.getLogger(__name__)


def confusion(true_labels: np.ndarray, predicted_labels: np.ndarray, catalog: ClassCatalog) -> ConfusionMatrix:
    """
    Count (true, predicted) class-index pairs.

    Args:
        true_labels: Class indices of the reference
        predicted_labels: Class indices of the predictions
        catalog: Class catalog

    Returns:
        ConfusionMatrix with rows = true, columns = predicted
    """
    true_labels = np.asarray(true_labels, dtype=np.int64).reshape(-1)
    predicted_labels = np.asarray(predicted_labels, dtype=np.int64).reshape(-1)
    if len(true_labels) != len(predicted_labels):
        raise ShapeError(f"{len(true_labels)} true labels but {len(predicted_labels)} predictions")
    k = len(catalog)
    for what, labels in (('true', true_labels), ('predicted', predicted_labels)):
        if labels.size and (labels.min() < 0 or labels.max() >= k):
            raise LabelError(f"A {what} label is outside the {k}-class catalog")
    counts = np.bincount(true_labels * k + predicted_labels, minlength=k * k).reshape(k, k)
    return ConfusionMatrix(counts, catalog)


def _safe_ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    out = np.zeros(len(numerator), dtype=np.float64)
    np.divide(numerator, denominator, out=out, where=denominator > 0)
    return out


def overall_accuracy(cm: ConfusionMatrix) -> float:
    """Trace over total."""
    if cm.total == 0:
        raise EmptySampleError("Accuracy of an empty confusion matrix is undefined")
    return float(np.trace(cm.counts) / cm.total)


def report(cm: ConfusionMatrix) -> ClassReport:
    """
    Per-class precision, recall, F1 and support.

    Zero denominators give 0. Accuracy of an empty matrix is reported as 0.

    Args:
        cm: Confusion matrix

    Returns:
        ClassReport
    """
    diagonal = np.diag(cm.counts).astype(np.float64)
    precision = _safe_ratio(diagonal, cm.counts.sum(axis=0).astype(np.float64))
    recall = _safe_ratio(diagonal, cm.counts.sum(axis=1).astype(np.float64))
    f1 = _safe_ratio(2 * precision * recall, precision + recall)
    accuracy = overall_accuracy(cm) if cm.total else 0.0
    return ClassReport(
        catalog=cm.catalog,
        precision=precision,
        recall=recall,
        f1=f1,
        support=cm.supports,
        accuracy=accuracy,
        macro_f1=float(f1.mean()) if len(f1) else 0.0,
    )


def worst_classes(class_report: ClassReport, n: int = 3) -> List[ClassEntry]:
    """Classes ranked by ascending F1; ties keep catalog order."""
    order = np.argsort(class_report.f1, kind='stable')[:n]
    return [class_report.catalog.entries[i] for i in order]


def format_report_table(class_report: ClassReport, digits: int = 2) -> str:
    """
    Text table with Precision, Recall, F1-score, Support, ID and Class columns.

    Args:
        class_report: Report to format
        digits: Decimal places for scores

    Returns:
        Multi-line table
    """
    lines = [f"{'Precision':>9} {'Recall':>7} {'F1-score':>8} {'Support':>7}  {'ID':<4} Class"]
    for row in class_report.rows():
        lines.append(
            f"{format_score(row['precision'], digits):>9} {format_score(row['recall'], digits):>7} "
            f"{format_score(row['f1'], digits):>8} {row['support']:>7}  {row['class_id']:<4} "
            f"{truncate_text(row['name'], 40)}"
        )
    total = int(class_report.support.sum())
    lines.append(f"{'accuracy':>17} {format_score(class_report.accuracy, digits):>8} {total:>7}")
    lines.append(f"{'macro F1':>17} {format_score(class_report.macro_f1, digits):>8} {total:>7}")
    return '\n'.join(lines)


class MetricsService:
    """Evaluates trained models and writes report artifacts."""

    def __init__(self, repo: Optional[MetricsRepository] = None) -> None:
        self.repo = repo or MetricsRepository()

    def evaluate_model(
        self,
        model: Model,
        patchset: PatchSet,
        split: str = 'test',
        report_path=None,
        confusion_path=None,
    ) -> Tuple[ConfusionMatrix, ClassReport, float, float]:
        """
        Confusion matrix, report, loss and accuracy of a model on one split.

        Args:
            model: Trained model
            patchset: Patch set matching the model's catalog
            split: Split to evaluate
            report_path: Optional report CSV path
            confusion_path: Optional confusion CSV path

        Returns:
            (confusion matrix, report, loss, accuracy)
        """
        values, labels = patchset.split_arrays(split)
        loss_value, accuracy = evaluate(model, patchset, split)
        predicted, _ = predict(model, values)
        cm = confusion(labels, predicted, patchset.catalog)
        class_report = report(cm)
        if report_path is not None:
            self.repo.write_report_csv(class_report, report_path)
        if confusion_path is not None:
            self.repo.write_confusion_csv(cm, confusion_path)
        logger.info("Evaluated %d %s patches: loss=%.4f accuracy=%.4f", len(labels), split, loss_value, accuracy)
        return cm, class_report, loss_value, accuracy
