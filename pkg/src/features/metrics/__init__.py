"""
Metrics feature package.
"""

from .repository import MetricsRepository, read_confusion_csv  # noqa: F401
from .service import (  # noqa: F401
    MetricsService,
    confusion,
    format_report_table,
    overall_accuracy,
    report,
    worst_classes,
)
