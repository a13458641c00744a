"""
Pipeline configuration assembled from settings, a dotenv file and flags.
"""
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple

from dotenv import dotenv_values

from config import settings
from src.core.errors import ConfigError, InputError
from src.models.network import TrainConfig
from src.utils.validators import validate_positive, validate_rate, validate_ratios

logger = logging.getLogger(__name__)


def _flag(raw: str) -> bool:
    return raw.strip().lower() == 'true'


# dotenv key -> (field, parser); training keys go to TrainConfig
ENV_KEYS: Dict[str, Tuple[str, Callable[[str], Any]]] = {
    'LULC_SEED': ('seed', int),
    'LULC_LEARNING_RATE': ('learning_rate', float),
    'LULC_EPOCHS': ('epochs', int),
    'LULC_BATCH_SIZE': ('batch_size', int),
    'LULC_OPTIMIZER': ('optimizer', str.lower),
    'LULC_AUGMENT': ('augment', _flag),
    'LULC_DROPOUT_RATE': ('dropout_rate', float),
    'LULC_BN_MOMENTUM': ('bn_momentum', float),
    'LULC_SPLIT_RATIOS': ('split_ratios', settings._parse_ratios),
    'LULC_CELL_SIZE': ('cell_size', float),
    'LULC_NDWI_FLIP': ('ndwi_flip', _flag),
    'LULC_TSNE_PERPLEXITY': ('tsne_perplexity', float),
    'LULC_TSNE_ITERATIONS': ('tsne_iterations', int),
    'LULC_TSNE_LEARNING_RATE': ('tsne_learning_rate', float),
    'LULC_GROUP_THRESHOLD': ('group_threshold', float),
    'LULC_OUTPUT_DIR': ('output_dir', Path),
}
TRAIN_FIELDS = {f.name for f in fields(TrainConfig)}

# Parsed argument names that override configuration values
CLI_OVERRIDES = (
    'learning_rate', 'epochs', 'batch_size', 'augment', 'optimizer', 'dropout_rate',
    'tsne_perplexity', 'tsne_iterations', 'tsne_learning_rate', 'output_dir',
)


@dataclass
class PipelineConfig:
    """Settings shared by every subcommand; defaults reproduce the reference protocol."""

    seed: int = settings.DEFAULT_SEED
    train: TrainConfig = field(default_factory=TrainConfig.from_env)
    dropout_rate: float = settings.DROPOUT_RATE
    split_ratios: Tuple[float, float, float] = settings.SPLIT_RATIOS
    cell_size: float = settings.CELL_SIZE
    ndwi_flip: bool = settings.NDWI_FLIP
    tsne_perplexity: float = settings.TSNE_PERPLEXITY
    tsne_iterations: int = settings.TSNE_ITERATIONS
    tsne_learning_rate: float = settings.TSNE_LEARNING_RATE
    group_threshold: float = settings.GROUP_THRESHOLD
    output_dir: Path = settings.OUTPUT_DIR

    def __post_init__(self):
        validate_ratios(self.split_ratios)
        validate_rate(self.dropout_rate)
        validate_positive(self.tsne_perplexity, 'LULC_TSNE_PERPLEXITY')
        validate_positive(self.tsne_iterations, 'LULC_TSNE_ITERATIONS')
        validate_positive(self.tsne_learning_rate, 'LULC_TSNE_LEARNING_RATE')
        self.output_dir = Path(self.output_dir)

    @classmethod
    def load(cls, config_path: Optional[str] = None, **overrides) -> 'PipelineConfig':
        """
        Build a configuration.

        Values come from settings (environment), then from the dotenv file
        named by config_path, then from explicit overrides; None overrides
        are ignored.

        Args:
            config_path: Optional dotenv file
            **overrides: Field values, including TrainConfig fields

        Returns:
            PipelineConfig
        """
        values: Dict[str, Any] = {}
        if config_path is not None:
            if not Path(config_path).exists():
                raise InputError(f"Config file not found: {config_path}")
            for key, raw in dotenv_values(config_path).items():
                if key not in ENV_KEYS or raw is None:
                    continue
                name, parse = ENV_KEYS[key]
                try:
                    values[name] = parse(raw)
                except ValueError as exc:
                    raise ConfigError(f"Bad value for {key} in {config_path}: {exc}") from None
            logger.debug("Loaded %d settings from %s", len(values), config_path)
        values.update({k: v for k, v in overrides.items() if v is not None})

        seed = values.pop('seed', settings.DEFAULT_SEED)
        train_values = {k: values.pop(k) for k in list(values) if k in TRAIN_FIELDS}
        train_values['seed'] = seed
        unknown = set(values) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"Unknown configuration fields {sorted(unknown)}")
        return cls(seed=seed, train=TrainConfig.from_env(**train_values), **values)
