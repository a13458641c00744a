"""
The lightweight ConvNet and its embedding variant.
"""
import copy
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from config.settings import BN_EPSILON, BN_MOMENTUM, COSINE_SOFTMAX_SCALE
from src.core.decorators import require_mode
from src.core.errors import ConfigError, ShapeError
from src.features.network import layers
from src.models.network import ArchitectureDescriptor
from src.models.raster import ClassCatalog, NormalizationParams

logger = logging.getLogger(__name__)

MODES = ('train', 'eval')
Tensors = Dict[str, np.ndarray]


class Model:
    """
    Parameter tensors, batch-norm running statistics and a mode flag.

    A forward pass in train mode caches the activations needed by
    backward(); the cache belongs to the most recent forward call.
    """

    def __init__(
        self,
        descriptor: ArchitectureDescriptor,
        parameters: Tensors,
        running_mean: np.ndarray,
        running_var: np.ndarray,
        normalization: Optional[NormalizationParams] = None,
        catalog: Optional[ClassCatalog] = None,
        cosine_scale: float = COSINE_SOFTMAX_SCALE,
        bn_momentum: float = BN_MOMENTUM,
        dtype=np.float32,
    ) -> None:
        self.descriptor = descriptor
        self.dtype = np.dtype(dtype)
        expected = descriptor.parameter_shapes()
        if [name for name, _ in expected] != list(parameters):
            raise ShapeError(f"Parameter names {list(parameters)} do not match the architecture")
        for name, shape in expected:
            if tuple(parameters[name].shape) != shape:
                raise ShapeError(f"{name} has shape {parameters[name].shape}, expected {shape}")
        self.parameters: Tensors = {name: np.asarray(v, dtype=self.dtype) for name, v in parameters.items()}
        width = descriptor.conv_widths[-1]
        self.running_mean = np.asarray(running_mean, dtype=self.dtype).reshape(width)
        self.running_var = np.asarray(running_var, dtype=self.dtype).reshape(width)
        if np.any(self.running_var <= 0):
            raise ShapeError("Batch-norm running variance must be positive")
        if normalization is not None and len(normalization) != descriptor.input_channels:
            raise ShapeError("Normalization parameters do not match the input channels")
        if catalog is not None and len(catalog) != descriptor.num_classes:
            raise ShapeError(f"Catalog has {len(catalog)} classes, model has {descriptor.num_classes}")
        self.normalization = normalization
        self.catalog = catalog
        self.cosine_scale = float(cosine_scale)
        self.bn_momentum = float(bn_momentum)
        self.mode = 'eval'
        self._cache: Optional[Dict] = None

    @classmethod
    def initialize(
        cls,
        descriptor: ArchitectureDescriptor,
        seed: int = 0,
        dtype=np.float32,
        **kwargs,
    ) -> 'Model':
        """
        Glorot-uniform kernels, zero biases, BN gamma=1 and beta=0.

        Args:
            descriptor: Architecture
            seed: Initialization seed
            dtype: Parameter dtype
            kwargs: Passed to the constructor

        Returns:
            Model in eval mode
        """
        rng = np.random.default_rng([seed, 0])
        parameters: Tensors = {}
        for name, shape in descriptor.parameter_shapes():
            if name == 'bn/gamma':
                parameters[name] = np.ones(shape)
            elif name.endswith('/kernel'):
                parameters[name] = layers.glorot_uniform(rng, shape[0], shape[1], shape)
            else:
                parameters[name] = np.zeros(shape)
        width = descriptor.conv_widths[-1]
        return cls(descriptor, parameters, np.zeros(width), np.ones(width), dtype=dtype, **kwargs)

    def train(self) -> 'Model':
        self.mode = 'train'
        return self

    def eval(self) -> 'Model':
        self.mode = 'eval'
        self._cache = None
        return self

    def set_mode(self, mode: str) -> 'Model':
        if mode not in MODES:
            raise ConfigError(f"Unknown mode {mode!r}")
        return self.train() if mode == 'train' else self.eval()

    def copy(self) -> 'Model':
        clone = copy.copy(self)
        clone.parameters = {k: v.copy() for k, v in self.parameters.items()}
        clone.running_mean = self.running_mean.copy()
        clone.running_var = self.running_var.copy()
        clone._cache = None
        return clone

    def astype(self, dtype) -> 'Model':
        """Copy of the model with every tensor cast to dtype."""
        clone = self.copy()
        clone.dtype = np.dtype(dtype)
        clone.parameters = {k: v.astype(dtype) for k, v in self.parameters.items()}
        clone.running_mean = self.running_mean.astype(dtype)
        clone.running_var = self.running_var.astype(dtype)
        return clone

    def state(self) -> Tuple[Tensors, np.ndarray, np.ndarray]:
        """Snapshot of parameters and running statistics."""
        return (
            {k: v.copy() for k, v in self.parameters.items()},
            self.running_mean.copy(),
            self.running_var.copy(),
        )

    def load_state(self, state: Tuple[Tensors, np.ndarray, np.ndarray]) -> None:
        parameters, running_mean, running_var = state
        self.parameters = {k: v.copy() for k, v in parameters.items()}
        self.running_mean = running_mean.copy()
        self.running_var = running_var.copy()

    def prepare(self, values: np.ndarray) -> np.ndarray:
        """Normalize raw patch values with the stored parameters and cast."""
        values = np.asarray(values)
        if values.ndim != 4 or values.shape[1:] != self.descriptor.input_shape:
            raise ShapeError(f"Batch shape {values.shape} does not match input {self.descriptor.input_shape}")
        if self.normalization is not None:
            values = (values - self.normalization.mean) / self.normalization.std
        return values.astype(self.dtype)

    def sample_noise(self, batch_size: int, rng: np.random.Generator) -> List[np.ndarray]:
        """Dropout noise for every hidden dense layer."""
        return [
            layers.dropout_noise((batch_size, width), self.descriptor.dropout_rate, rng, self.dtype)
            for width in self.descriptor.hidden_widths
        ]

    def forward(
        self,
        batch: np.ndarray,
        rng: Optional[np.random.Generator] = None,
        noise: Optional[List[np.ndarray]] = None,
        update_stats: bool = True,
    ) -> np.ndarray:
        """
        Forward pass in the current mode.

        Args:
            batch: (B, 3, 3, C) normalized values
            rng: Generator for dropout noise in train mode
            noise: Pre-sampled dropout noise, overrides rng
            update_stats: Update BN running statistics in train mode

        Returns:
            Logits (B, K) or unit embeddings (B, embedding_dim)
        """
        d = self.descriptor
        if batch.ndim != 4 or batch.shape[1:] != d.input_shape:
            raise ShapeError(f"Batch shape {batch.shape} does not match input {d.input_shape}")
        training = self.mode == 'train'
        if training and noise is None:
            if rng is None and d.dropout_rate > 0:
                raise ConfigError("Training-mode forward needs a generator or pre-sampled noise")
            noise = self.sample_noise(len(batch), rng)
        p = self.parameters
        cache: Dict = {'conv': [], 'dense': []}

        h = batch.astype(self.dtype)
        for i in range(1, len(d.conv_widths) + 1):
            z, x_in = layers.conv1x1_forward(h, p[f'conv{i}/kernel'], p[f'conv{i}/bias'])
            h, mask = layers.relu_forward(z)
            cache['conv'].append((x_in, mask))

        h, bn_cache = layers.batchnorm_forward(
            h, p['bn/gamma'], p['bn/beta'], self.running_mean, self.running_var,
            mode=self.mode, momentum=self.bn_momentum, eps=BN_EPSILON,
            update_stats=training and update_stats,
        )
        cache['bn'] = bn_cache
        h = h.reshape(len(h), -1)

        for i in range(1, len(d.hidden_widths) + 1):
            z, x_in = layers.dense_forward(h, p[f'dense{i}/kernel'], p[f'dense{i}/bias'])
            h, mask = layers.relu_forward(z)
            if training:
                h = h * noise[i - 1]
                cache['dense'].append((x_in, mask, noise[i - 1]))
            else:
                cache['dense'].append((x_in, mask, None))

        if d.variant == 'embedding':
            z, x_in = layers.dense_forward(h, p['embed/kernel'], p['embed/bias'])
            out, l2_cache = layers.l2_normalize_forward(z)
            cache['head'] = (x_in, l2_cache)
        else:
            out, x_in = layers.dense_forward(h, p['output/kernel'], p['output/bias'])
            cache['head'] = (x_in, None)

        self._cache = cache if training else None
        return out

    def class_scores(self, outputs: np.ndarray) -> np.ndarray:
        """Logits from forward outputs; the embedding variant uses scaled leading components."""
        if self.descriptor.variant == 'embedding':
            return self.cosine_scale * outputs[:, :self.descriptor.num_classes]
        return outputs

    def relu_masks(self) -> List[np.ndarray]:
        """Activation patterns of the last train-mode forward pass."""
        if self._cache is None:
            return []
        return [mask for _, mask in self._cache['conv']] + [mask for _, mask, _ in self._cache['dense']]

    @require_mode('train')
    def backward(self, dscores: np.ndarray) -> Tensors:
        """
        Gradients of the loss for every parameter tensor.

        Args:
            dscores: Gradient of the loss w.r.t. class_scores(forward(...))

        Returns:
            Dict of gradients keyed like self.parameters
        """
        if self._cache is None:
            raise ConfigError("backward() needs a preceding train-mode forward pass")
        d = self.descriptor
        p = self.parameters
        cache = self._cache
        grads: Tensors = {}

        head_in, l2_cache = cache['head']
        if d.variant == 'embedding':
            dout = np.zeros((len(dscores), d.embedding_dim), dtype=dscores.dtype)
            dout[:, :d.num_classes] = self.cosine_scale * dscores
            dz = layers.l2_normalize_backward(dout, l2_cache)
            dh, grads['embed/kernel'], grads['embed/bias'] = layers.dense_backward(dz, head_in, p['embed/kernel'])
        else:
            dh, grads['output/kernel'], grads['output/bias'] = layers.dense_backward(
                dscores, head_in, p['output/kernel']
            )

        for i in range(len(d.hidden_widths), 0, -1):
            x_in, mask, noise = cache['dense'][i - 1]
            dz = layers.relu_backward(dh * noise, mask)
            dh, grads[f'dense{i}/kernel'], grads[f'dense{i}/bias'] = layers.dense_backward(
                dz, x_in, p[f'dense{i}/kernel']
            )

        width = d.conv_widths[-1]
        dh = dh.reshape(len(dh), *d.input_shape[:2], width)
        dh, grads['bn/gamma'], grads['bn/beta'] = layers.batchnorm_backward(dh, cache['bn'], p['bn/gamma'])

        for i in range(len(d.conv_widths), 0, -1):
            x_in, mask = cache['conv'][i - 1]
            dz = layers.relu_backward(dh, mask)
            dh, grads[f'conv{i}/kernel'], grads[f'conv{i}/bias'] = layers.conv1x1_backward(
                dz, x_in, p[f'conv{i}/kernel']
            )

        return {name: grads[name].astype(self.dtype) for name in p}

    def loss_and_gradients(
        self,
        batch: np.ndarray,
        labels: np.ndarray,
        rng: Optional[np.random.Generator] = None,
        noise: Optional[List[np.ndarray]] = None,
        update_stats: bool = True,
    ) -> Tuple[float, Tensors, np.ndarray]:
        """Train-mode forward, cross-entropy and backward; returns (loss, grads, scores)."""
        scores = self.class_scores(self.forward(batch, rng=rng, noise=noise, update_stats=update_stats))
        loss, dscores = layers.softmax_cross_entropy(scores, labels)
        return loss, self.backward(dscores), scores

    @require_mode('eval')
    def predict(self, batch: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Class indices and probabilities for a normalized batch.

        Ties resolve to the lowest class index.
        """
        probabilities = layers.softmax(self.class_scores(self.forward(batch)).astype(np.float64))
        return np.argmax(probabilities, axis=1), probabilities
