"""
Patch set feature package.
"""

from .repository import PatchSetRepository, read_patchset, write_patchset  # noqa: F401
from .service import (  # noqa: F401
    TRANSFORM_NAMES,
    PatchSetService,
    allocate_counts,
    apply_transform,
    augment,
    augment_batch,
    balance,
    count_by_split,
    extract_homogeneous,
    split,
)
