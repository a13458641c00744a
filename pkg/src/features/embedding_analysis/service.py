"""
Service layer for embedding analysis.

Latent extraction with the embedding variant, class-similarity ranking,
and class-group mappings applied to catalogs, patch sets, predictions and
confusion matrices.
"""
import logging
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist, squareform

from config.settings import GROUP_THRESHOLD
from src.core.decorators import require_variant
from src.core.errors import ConfigError, CoverageError
from src.features.embedding_analysis.repository import EmbeddingRepository
from src.features.embedding_analysis.tsne import TsneResult, tsne
from src.features.network.model import Model
from src.models.evaluation import ClassGroup, ConfusionMatrix, GroupMapping, LatentSet
from src.models.patches import PatchSet
from src.models.raster import ClassCatalog, ClassEntry

logger = logging.getLogger(__name__)

EMBED_CHUNK = 4096


@require_variant('embedding')
def extract_latents(model: Model, patchset: PatchSet, split: Optional[str] = 'test') -> LatentSet:
    """
    Unit latent vectors of the patches in one split.

    Args:
        model: Embedding-variant model
        patchset: Patch set
        split: Split name, or None for every patch

    Returns:
        LatentSet
    """
    model.eval()
    if split is None:
        values, labels = patchset.values, patchset.labels.astype(np.int64)
    else:
        values, labels = patchset.split_arrays(split)
    parts = [
        model.forward(model.prepare(values[start:start + EMBED_CHUNK])).astype(np.float64)
        for start in range(0, len(values), EMBED_CHUNK)
    ]
    vectors = np.concatenate(parts) if parts else np.zeros((0, model.descriptor.embedding_dim))
    return LatentSet(vectors=vectors, labels=labels)


@dataclass
class GroupSuggestion:
    """Suggested mapping plus every class pair ranked by centroid distance."""

    mapping: GroupMapping
    pairs: List[Dict] = field(default_factory=list)


def class_centroids(latents: LatentSet, catalog: ClassCatalog) -> np.ndarray:
    """
    Mean latent vector per catalog class.

    Vectors are sorted before averaging so the result does not depend on
    the order of the latent set.
    """
    centroids = np.zeros((len(catalog), latents.vectors.shape[1]))
    for entry in catalog:
        members = latents.vectors[latents.labels == entry.index]
        if len(members) == 0:
            raise CoverageError(f"Class {entry.id} ({entry.name}) has no latent vectors")
        ordered = members[np.lexsort(members.T[::-1])]
        centroids[entry.index] = ordered.mean(axis=0)
    return centroids


def suggest_groups(
    latents: LatentSet,
    catalog: ClassCatalog,
    threshold: float = GROUP_THRESHOLD,
) -> GroupSuggestion:
    """
    Propose merging classes whose centroids are close in cosine distance.

    Pairs below the threshold are linked and connected components with more
    than one class become groups g1, g2, ... ordered by their first member.

    Args:
        latents: Latent vectors with class indices
        catalog: Catalog the indices refer to
        threshold: Cosine distance below which two classes are linked

    Returns:
        GroupSuggestion
    """
    if len(catalog) < 2:
        raise ConfigError("Need at least two classes to suggest groups")
    centroids = class_centroids(latents, catalog)
    distances = np.nan_to_num(squareform(pdist(centroids, 'cosine')), nan=1.0)

    k = len(catalog)
    rows, cols = np.triu_indices(k, 1)
    linked = distances[rows, cols] < threshold
    graph = csr_matrix((np.ones(int(linked.sum())), (rows[linked], cols[linked])), shape=(k, k))
    _, component = connected_components(graph, directed=False)

    groups = []
    seen = set()
    for index in range(k):
        label = component[index]
        members = np.flatnonzero(component == label)
        if label in seen or len(members) < 2:
            continue
        seen.add(label)
        groups.append(ClassGroup(f"g{len(groups) + 1}", tuple(catalog.entries[m].id for m in members)))

    order = np.argsort(distances[rows, cols], kind='stable')
    pairs = [
        {
            'class_a': catalog.entries[rows[i]].id,
            'class_b': catalog.entries[cols[i]].id,
            'distance': float(distances[rows[i], cols[i]]),
        }
        for i in order
    ]
    logger.info("Suggested %d groups at threshold %.3f", len(groups), threshold)
    return GroupSuggestion(mapping=GroupMapping(tuple(groups)), pairs=pairs)


def representative_id(group: ClassGroup) -> int:
    """Member id whose decimal text sorts first."""
    return min(group.members, key=str)


def grouped_catalog(catalog: ClassCatalog, mapping: GroupMapping) -> Tuple[ClassCatalog, np.ndarray]:
    """
    Catalog after merging groups and the old-index -> new-index lookup.

    A group takes the position of its first member in the old catalog.
    """
    for group in mapping.groups:
        missing = [m for m in group.members if not catalog.contains_id(m)]
        if missing:
            raise CoverageError(f"Group {group.group_id} members {missing} are not in the catalog")

    entries: List[ClassEntry] = []
    lookup = np.zeros(len(catalog), dtype=np.int64)
    placed: Dict[str, int] = {}
    for entry in catalog:
        group = mapping.group_of(entry.id)
        if group is None:
            lookup[entry.index] = len(entries)
            entries.append(ClassEntry(len(entries), entry.id, entry.name, entry.code))
        elif group.group_id in placed:
            lookup[entry.index] = placed[group.group_id]
        else:
            placed[group.group_id] = len(entries)
            lookup[entry.index] = len(entries)
            names = ' / '.join(catalog.entry_for_id(m).name for m in group.members)
            entries.append(ClassEntry(len(entries), representative_id(group), names, group.group_id))
    return ClassCatalog(tuple(entries)), lookup


@singledispatch
def apply_grouping(target, mapping: GroupMapping, catalog: Optional[ClassCatalog] = None):
    """
    Remap a catalog, patch set, confusion matrix or prediction array.

    Args:
        target: Object to remap
        mapping: Group mapping
        catalog: Catalog of a prediction array (required for arrays only)

    Returns:
        Remapped object of the same kind
    """
    raise TypeError(f"Cannot apply a grouping to {type(target).__name__}")


@apply_grouping.register
def _group_catalog(target: ClassCatalog, mapping: GroupMapping, catalog: Optional[ClassCatalog] = None) -> ClassCatalog:
    return grouped_catalog(target, mapping)[0]


@apply_grouping.register
def _group_confusion(target: ConfusionMatrix, mapping: GroupMapping, catalog: Optional[ClassCatalog] = None) -> ConfusionMatrix:
    merged, lookup = grouped_catalog(target.catalog, mapping)
    membership = np.zeros((len(target.catalog), len(merged)), dtype=np.int64)
    membership[np.arange(len(lookup)), lookup] = 1
    return ConfusionMatrix(membership.T @ target.counts @ membership, merged)


@apply_grouping.register
def _group_patchset(target: PatchSet, mapping: GroupMapping, catalog: Optional[ClassCatalog] = None) -> PatchSet:
    merged, lookup = grouped_catalog(target.catalog, mapping)
    return PatchSet(
        values=target.values.copy(),
        labels=lookup[target.labels.astype(np.int64)].astype(np.uint16),
        splits=target.splits.copy(),
        catalog=merged,
        channels=list(target.channels),
        seed=target.seed,
        origins=target.origins.copy(),
    )


@apply_grouping.register
def _group_predictions(target: np.ndarray, mapping: GroupMapping, catalog: Optional[ClassCatalog] = None) -> np.ndarray:
    if catalog is None:
        raise ConfigError("Remapping a prediction array needs the catalog its indices refer to")
    _, lookup = grouped_catalog(catalog, mapping)
    return lookup[np.asarray(target, dtype=np.int64)]


def fine_grain_dataset(patchset: PatchSet, group: ClassGroup) -> PatchSet:
    """
    Binary patch set of the two classes of one group.

    Args:
        patchset: Patch set in the ungrouped catalog
        group: Group with exactly two members

    Returns:
        PatchSet labeled 0/1 in catalog order, splits kept
    """
    if len(group.members) != 2:
        raise ConfigError(f"Fine-grain training needs a two-class group, {group.group_id} has {len(group.members)}")
    for member in group.members:
        if not patchset.catalog.contains_id(member):
            raise CoverageError(f"Class {member} of {group.group_id} is not in the catalog")
    indices = sorted(patchset.catalog.index_of(m) for m in group.members)
    entries = [patchset.catalog.entries[i] for i in indices]
    binary = ClassCatalog(tuple(ClassEntry(n, e.id, e.name, e.code) for n, e in enumerate(entries)))

    labels = patchset.labels.astype(np.int64)
    keep = np.isin(labels, indices)
    subset = patchset.subset(keep)
    return PatchSet(
        values=subset.values,
        labels=(labels[keep] == indices[1]).astype(np.uint16),
        splits=subset.splits,
        catalog=binary,
        channels=subset.channels,
        seed=subset.seed,
        origins=subset.origins,
    )


class EmbeddingService:
    """Latent, t-SNE and grouping artifacts for the command line."""

    def __init__(self, repo: Optional[EmbeddingRepository] = None) -> None:
        self.repo = repo or EmbeddingRepository()

    def export_latents(self, model: Model, patchset: PatchSet, split: Optional[str], output_path) -> LatentSet:
        latents = extract_latents(model, patchset, split)
        self.repo.write_latents_csv(latents, output_path)
        return latents

    def project(
        self,
        latents: LatentSet,
        output_path,
        svg_path=None,
        catalog: Optional[ClassCatalog] = None,
        **tsne_options,
    ) -> TsneResult:
        """Run t-SNE on latents and write the coordinates (and an optional scatter)."""
        result = tsne(latents.vectors, **tsne_options)
        self.repo.write_tsne_csv(result.coordinates, latents.labels, output_path)
        if svg_path is not None:
            self.repo.write_scatter_svg(result.coordinates, latents.labels, svg_path, catalog)
        return result

    def suggest(self, latents: LatentSet, catalog: ClassCatalog, threshold: float, output_path) -> GroupSuggestion:
        suggestion = suggest_groups(latents, catalog, threshold)
        self.repo.write_grouping(suggestion.mapping, output_path, pairs=suggestion.pairs)
        return suggestion
