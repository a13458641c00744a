"""
Repository layer for metric CSV artifacts.
"""
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from config.workspace import artifacts
from src.core.errors import FormatError, InputError
from src.models.evaluation import ClassReport, ConfusionMatrix
from src.models.raster import ClassCatalog

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ['class_index', 'class_id', 'name', 'precision', 'recall', 'f1', 'support']
CONFUSION_INDEX = 'true'


class MetricsRepository:
    """Reads and writes report and confusion CSV files."""

    def write_report_csv(self, class_report: ClassReport, path) -> Path:
        """
        Write the per-class report; the last two rows carry overall accuracy
        and macro F1 in the f1 column.
        """
        rows = class_report.rows()
        total = int(class_report.support.sum())
        for name, value in (('overall_accuracy', class_report.accuracy), ('macro_f1', class_report.macro_f1)):
            rows.append({
                'class_index': '', 'class_id': '', 'name': name,
                'precision': '', 'recall': '', 'f1': float(value), 'support': total,
            })
        frame = pd.DataFrame(rows, columns=REPORT_COLUMNS)
        with artifacts.atomic_write(path, 'w') as handle:
            frame.to_csv(handle, index=False, lineterminator='\n')
        logger.debug("Report written to %s", path)
        return Path(path)

    def write_confusion_csv(self, cm: ConfusionMatrix, path) -> Path:
        """Header row holds predicted class codes; the first column holds true class codes."""
        labels = cm.catalog.labels
        frame = pd.DataFrame(cm.counts, index=pd.Index(labels, name=CONFUSION_INDEX), columns=labels)
        with artifacts.atomic_write(path, 'w') as handle:
            frame.to_csv(handle, lineterminator='\n')
        logger.debug("Confusion matrix written to %s", path)
        return Path(path)

    def read_confusion_csv(self, path, catalog: ClassCatalog) -> ConfusionMatrix:
        """
        Read a confusion CSV written for the given catalog.

        Args:
            path: CSV path
            catalog: Catalog the matrix was computed with

        Returns:
            ConfusionMatrix
        """
        if not Path(path).exists():
            raise InputError(f"Confusion file not found: {path}")
        frame = pd.read_csv(path, index_col=0, dtype={CONFUSION_INDEX: str})
        rows = [str(v) for v in frame.index]
        columns = [str(v) for v in frame.columns]
        if rows != catalog.labels or columns != catalog.labels:
            raise FormatError(f"Confusion file {path} does not match catalog classes {catalog.labels}")
        return ConfusionMatrix(frame.to_numpy(dtype=np.int64), catalog)


def read_confusion_csv(path, catalog: ClassCatalog) -> ConfusionMatrix:
    return MetricsRepository().read_confusion_csv(path, catalog)
