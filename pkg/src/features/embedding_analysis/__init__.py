"""
Embedding analysis feature package.
"""

from .repository import EmbeddingRepository, read_grouping, write_grouping  # noqa: F401
from .service import (  # noqa: F401
    EmbeddingService,
    GroupSuggestion,
    apply_grouping,
    class_centroids,
    extract_latents,
    fine_grain_dataset,
    grouped_catalog,
    representative_id,
    suggest_groups,
)
from .tsne import (  # noqa: F401
    TsneResult,
    conditional_affinities,
    joint_affinities,
    kl_divergence,
    row_perplexities,
    tsne,
)
