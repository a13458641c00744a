"""Domain data models."""
from src.models.raster import (
    BASELINE_CHANNELS,
    NODATA_LABEL,
    ChannelDesc,
    ClassCatalog,
    ClassEntry,
    DemGrid,
    LabelRaster,
    NormalizationParams,
    RasterStack,
)
from src.models.patches import PATCH_SIZE, SPLIT_NAMES, Patch, PatchSet
from src.models.network import ArchitectureDescriptor, EpochRecord, TrainConfig, TrainingHistory
from src.models.evaluation import (
    REFERENCE_GROUPING,
    ClassGroup,
    ClassMap,
    ClassReport,
    ConfusionMatrix,
    GroupMapping,
    LatentSet,
)

__all__ = [
    'BASELINE_CHANNELS', 'NODATA_LABEL', 'ChannelDesc', 'ClassCatalog', 'ClassEntry', 'DemGrid',
    'LabelRaster', 'NormalizationParams', 'RasterStack', 'PATCH_SIZE', 'SPLIT_NAMES', 'Patch',
    'PatchSet', 'ArchitectureDescriptor', 'EpochRecord', 'TrainConfig', 'TrainingHistory',
    'REFERENCE_GROUPING', 'ClassGroup', 'ClassMap', 'ClassReport', 'ConfusionMatrix', 'GroupMapping',
    'LatentSet',
]
