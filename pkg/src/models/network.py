"""
Network architecture descriptor, training configuration and history.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

from config import settings
from src.core.errors import ConfigError
from src.models.patches import PATCH_SIZE
from src.utils.validators import validate_rate

VARIANTS = ('classifier', 'embedding')
OPTIMIZERS = ('adam', 'sgd')


@dataclass(frozen=True)
class ArchitectureDescriptor:
    """
    Fixed topology of the lightweight ConvNet.

    conv1x1(C->128) relu, conv1x1(128->64) relu, batchnorm(64), flatten,
    dense(576->128) relu + gaussian dropout, dense(128->32) ..., dense(32->16) ...,
    dense(16->K) logits. The embedding variant drops the last two dense layers
    and ends in dense(128->embedding_dim) + L2 normalization.
    """

    input_channels: int
    num_classes: int
    variant: str = 'classifier'
    conv_widths: Tuple[int, ...] = (128, 64)
    dense_widths: Tuple[int, ...] = (128, 32, 16)
    dropout_rate: float = 0.3
    embedding_dim: int = 17

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"Unknown variant {self.variant!r}")
        if self.input_channels < 1 or self.num_classes < 2:
            raise ConfigError("Need at least one input channel and two classes")
        validate_rate(self.dropout_rate)
        if self.variant == 'embedding':
            if len(self.dense_widths) < 3:
                raise ConfigError("Embedding variant needs three hidden dense layers to replace")
            if self.num_classes > self.embedding_dim:
                raise ConfigError(
                    f"Embedding dimension {self.embedding_dim} cannot host {self.num_classes} classes"
                )

    @property
    def input_shape(self) -> Tuple[int, int, int]:
        return (PATCH_SIZE, PATCH_SIZE, self.input_channels)

    @property
    def flatten_width(self) -> int:
        return PATCH_SIZE * PATCH_SIZE * self.conv_widths[-1]

    @property
    def hidden_widths(self) -> Tuple[int, ...]:
        """Hidden dense widths that carry ReLU + Gaussian dropout."""
        if self.variant == 'embedding':
            return self.dense_widths[:-2]
        return self.dense_widths

    @property
    def output_width(self) -> int:
        return self.embedding_dim if self.variant == 'embedding' else self.num_classes

    def parameter_shapes(self) -> List[Tuple[str, Tuple[int, ...]]]:
        """Ordered (name, shape) of every trainable tensor."""
        shapes: List[Tuple[str, Tuple[int, ...]]] = []
        width = self.input_channels
        for i, conv in enumerate(self.conv_widths, start=1):
            shapes.append((f'conv{i}/kernel', (width, conv)))
            shapes.append((f'conv{i}/bias', (conv,)))
            width = conv
        shapes.append(('bn/gamma', (width,)))
        shapes.append(('bn/beta', (width,)))
        width = self.flatten_width
        for i, dense in enumerate(self.hidden_widths, start=1):
            shapes.append((f'dense{i}/kernel', (width, dense)))
            shapes.append((f'dense{i}/bias', (dense,)))
            width = dense
        head = 'embed' if self.variant == 'embedding' else 'output'
        shapes.append((f'{head}/kernel', (width, self.output_width)))
        shapes.append((f'{head}/bias', (self.output_width,)))
        return shapes

    def parameter_count(self) -> int:
        total = 0
        for _, shape in self.parameter_shapes():
            size = 1
            for dim in shape:
                size *= dim
            total += size
        return total

    def to_dict(self) -> Dict:
        raw = asdict(self)
        raw['conv_widths'] = list(self.conv_widths)
        raw['dense_widths'] = list(self.dense_widths)
        return raw

    @classmethod
    def from_dict(cls, raw: Dict) -> 'ArchitectureDescriptor':
        return cls(
            input_channels=int(raw['input_channels']),
            num_classes=int(raw['num_classes']),
            variant=raw['variant'],
            conv_widths=tuple(int(v) for v in raw['conv_widths']),
            dense_widths=tuple(int(v) for v in raw['dense_widths']),
            dropout_rate=float(raw['dropout_rate']),
            embedding_dim=int(raw['embedding_dim']),
        )


@dataclass
class TrainConfig:
    """Training hyperparameters; defaults are the reference protocol."""

    learning_rate: float = 1e-4
    epochs: int = 150
    batch_size: int = 32
    seed: int = 0
    augment: bool = True
    optimizer: str = 'adam'
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-7
    bn_momentum: float = 0.99
    cosine_scale: float = 10.0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ConfigError("learning_rate must be nonnegative")
        if self.epochs < 1 or self.batch_size < 2:
            raise ConfigError("epochs must be >= 1 and batch_size >= 2")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"Unknown optimizer {self.optimizer!r}")

    @classmethod
    def from_env(cls, **overrides) -> 'TrainConfig':
        """Load configuration from settings, then apply explicit overrides."""
        values = dict(
            learning_rate=settings.LEARNING_RATE,
            epochs=settings.EPOCHS,
            batch_size=settings.BATCH_SIZE,
            seed=settings.DEFAULT_SEED,
            augment=settings.AUGMENT,
            optimizer=settings.OPTIMIZER,
            beta1=settings.ADAM_BETA1,
            beta2=settings.ADAM_BETA2,
            epsilon=settings.ADAM_EPSILON,
            bn_momentum=settings.BN_MOMENTUM,
            cosine_scale=settings.COSINE_SOFTMAX_SCALE,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float


@dataclass
class TrainingHistory:
    records: List[EpochRecord] = field(default_factory=list)
    best_epoch: Optional[int] = None

    def __len__(self) -> int:
        return len(self.records)

    def append(self, record: EpochRecord) -> None:
        self.records.append(record)

    def as_rows(self) -> List[Dict]:
        return [asdict(r) for r in self.records]
