"""
Service layer for the network: training, evaluation and prediction.
"""
import logging
from typing import Iterator, List, Optional, Tuple

import numpy as np

from config.settings import DROPOUT_RATE
from src.core.decorators import require_mode
from src.core.errors import DataError, ShapeError
from src.features.network import layers
from src.features.network.model import Model
from src.features.network.optimizers import build_optimizer
from src.features.network.repository import ModelRepository
from src.features.patchset.repository import PatchSetRepository
from src.features.patchset.service import TRANSFORM_COUNT, augment_batch
from src.features.raster_core.service import fit_normalization_values
from src.models.network import ArchitectureDescriptor, EpochRecord, TrainConfig, TrainingHistory
from src.models.patches import PatchSet

logger = logging.getLogger(__name__)

EVAL_CHUNK = 4096


def forward(model: Model, batch: np.ndarray, mode: Optional[str] = None, rng=None) -> np.ndarray:
    """
    Forward pass, optionally switching the model mode first.

    Args:
        model: Network
        batch: (B, 3, 3, C) normalized values
        mode: 'train' or 'eval'; keeps the current mode when omitted
        rng: Dropout generator for train mode

    Returns:
        Logits or unit embeddings
    """
    if mode is not None:
        model.set_mode(mode)
    return model.forward(batch, rng=rng)


def loss(logits: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
    """Mean softmax cross-entropy and its gradient w.r.t. the logits."""
    return layers.softmax_cross_entropy(logits, labels)


@require_mode('train')
def _backward(model: Model, batch: np.ndarray, labels: np.ndarray, rng=None, noise=None):
    return model.loss_and_gradients(batch, labels, rng=rng, noise=noise)


def backward(model: Model, batch: np.ndarray, labels: np.ndarray, rng=None, noise=None):
    """
    Loss and gradients for every parameter tensor on one batch.

    The model must be in train mode.

    Returns:
        (loss, gradients)
    """
    loss_value, grads, _ = _backward(model, batch, labels, rng=rng, noise=noise)
    return loss_value, grads


def batch_slices(count: int, batch_size: int) -> List[slice]:
    """Consecutive batches; a trailing single sample joins the previous batch."""
    starts = list(range(0, count, batch_size))
    slices = [slice(s, min(s + batch_size, count)) for s in starts]
    if len(slices) > 1 and count - starts[-1] == 1:
        slices[-2] = slice(slices[-2].start, count)
        slices.pop()
    return slices


def _chunks(count: int, size: int = EVAL_CHUNK) -> Iterator[slice]:
    for start in range(0, count, size):
        yield slice(start, min(start + size, count))


def evaluate_arrays(model: Model, values: np.ndarray, labels: np.ndarray) -> Tuple[float, float]:
    """Eval-mode loss and accuracy over raw patch values."""
    if len(values) == 0:
        raise DataError("Cannot evaluate on an empty sample")
    previous = model.mode
    model.eval()
    total_loss, correct = 0.0, 0
    for part in _chunks(len(values)):
        scores = model.class_scores(model.forward(model.prepare(values[part]))).astype(np.float64)
        batch_loss, _ = layers.softmax_cross_entropy(scores, labels[part])
        total_loss += batch_loss * len(scores)
        correct += int(np.sum(np.argmax(scores, axis=1) == labels[part]))
    model.set_mode(previous)
    return total_loss / len(values), correct / len(values)


def evaluate(model: Model, patchset: PatchSet, split: str = 'test') -> Tuple[float, float]:
    """
    Loss and accuracy of a model on one split.

    Args:
        model: Trained model
        patchset: Patch set
        split: 'train', 'val' or 'test'

    Returns:
        (loss, accuracy)
    """
    values, labels = patchset.split_arrays(split)
    if len(values) == 0:
        raise DataError(f"Split {split!r} is empty")
    return evaluate_arrays(model, values, labels)


def predict(model: Model, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Predicted class indices and probabilities for raw patch values.

    Args:
        model: Model in eval mode
        values: (N, 3, 3, C) raw values

    Returns:
        (indices (N,), probabilities (N, K))
    """
    values = np.asarray(values)
    if len(values) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros((0, model.descriptor.num_classes))
    indices, probabilities = [], []
    for part in _chunks(len(values)):
        idx, prob = model.predict(model.prepare(values[part]))
        indices.append(idx)
        probabilities.append(prob)
    return np.concatenate(indices), np.concatenate(probabilities)


def build_model(
    patchset: PatchSet,
    variant: str = 'classifier',
    seed: int = 0,
    dropout_rate: float = DROPOUT_RATE,
    dtype=np.float32,
) -> Model:
    """Freshly initialized model sized for a patch set."""
    descriptor = ArchitectureDescriptor(
        input_channels=patchset.channel_count,
        num_classes=len(patchset.catalog),
        variant=variant,
        dropout_rate=dropout_rate,
    )
    return Model.initialize(descriptor, seed=seed, dtype=dtype, catalog=patchset.catalog)


def train(model: Model, patchset: PatchSet, config: TrainConfig) -> Tuple[Model, TrainingHistory]:
    """
    Train with mini-batches, keeping the epoch with the best validation accuracy.

    Normalization is fit on the train split and stored in the model. Each
    epoch shuffles the train split and, when enabled, applies one random
    symmetry per patch.

    Args:
        model: Initialized model
        patchset: Patch set with train and val splits
        config: Training configuration

    Returns:
        (model in eval mode, history)
    """
    train_values, train_labels = patchset.split_arrays('train')
    val_values, val_labels = patchset.split_arrays('val')
    if len(train_values) < 2:
        raise DataError(f"Train split holds {len(train_values)} patches, need at least 2")
    if len(val_values) == 0:
        raise DataError("Validation split is empty")
    if patchset.channel_count != model.descriptor.input_channels:
        raise ShapeError(
            f"Patch set has {patchset.channel_count} channels, model expects {model.descriptor.input_channels}"
        )
    if len(patchset.catalog) != model.descriptor.num_classes:
        raise ShapeError(
            f"Patch set has {len(patchset.catalog)} classes, model expects {model.descriptor.num_classes}"
        )

    model.normalization = fit_normalization_values(train_values)
    model.catalog = patchset.catalog
    model.cosine_scale = config.cosine_scale
    model.bn_momentum = config.bn_momentum
    train_inputs = model.prepare(train_values)

    rng = np.random.default_rng([config.seed, 1])
    optimizer = build_optimizer(config)
    history = TrainingHistory()
    best_acc, best_state = -1.0, model.state()

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_inputs))
        inputs, labels = train_inputs[order], train_labels[order]
        if config.augment:
            inputs = augment_batch(inputs, rng.integers(0, TRANSFORM_COUNT, size=len(inputs)))

        model.train()
        seen, loss_sum, correct = 0, 0.0, 0
        for part in batch_slices(len(inputs), config.batch_size):
            batch_loss, grads, scores = model.loss_and_gradients(inputs[part], labels[part], rng=rng)
            optimizer.step(model.parameters, grads)
            size = part.stop - part.start
            seen += size
            loss_sum += batch_loss * size
            correct += int(np.sum(np.argmax(scores, axis=1) == labels[part]))

        val_loss, val_acc = evaluate_arrays(model, val_values, val_labels)
        record = EpochRecord(epoch, loss_sum / seen, correct / seen, val_loss, val_acc)
        history.append(record)
        if val_acc >= best_acc:
            best_acc, best_state = val_acc, model.state()
            history.best_epoch = epoch
        logger.info(
            "epoch %d/%d train_loss=%.4f train_acc=%.4f val_loss=%.4f val_acc=%.4f",
            epoch, config.epochs, record.train_loss, record.train_acc, val_loss, val_acc,
        )

    model.load_state(best_state)
    model.eval()
    logger.info("Kept epoch %d with val_acc=%.4f", history.best_epoch, best_acc)
    return model, history


class TrainingService:
    """Trains and evaluates models stored on disk."""

    def __init__(
        self,
        repo: Optional[ModelRepository] = None,
        patch_repo: Optional[PatchSetRepository] = None,
    ) -> None:
        self.repo = repo or ModelRepository()
        self.patch_repo = patch_repo or PatchSetRepository()

    def train_model(
        self,
        patchset: PatchSet,
        config: TrainConfig,
        model_path,
        variant: str = 'classifier',
        history_path=None,
        dropout_rate: float = DROPOUT_RATE,
    ) -> Tuple[Model, TrainingHistory]:
        """
        Train a fresh model on a patch set and write the checkpoint.

        Args:
            patchset: Patch set (already grouped or reduced if needed)
            config: Training configuration
            model_path: Checkpoint base path
            variant: 'classifier' or 'embedding'
            history_path: Optional CSV path for the per-epoch history
            dropout_rate: Gaussian dropout rate

        Returns:
            (model, history)
        """
        model = build_model(patchset, variant=variant, seed=config.seed, dropout_rate=dropout_rate)
        logger.info(
            "Training %s with %d parameters on %d classes",
            variant, model.descriptor.parameter_count(), model.descriptor.num_classes,
        )
        model, history = train(model, patchset, config)
        self.repo.save_model(model, model_path)
        if history_path is not None:
            self.repo.write_history(history, history_path)
        return model, history
