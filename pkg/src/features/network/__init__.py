"""
Network feature package.
"""

from .gradcheck import GradientCheckResult, check_gradients  # noqa: F401
from .layers import batchnorm_forward, gaussian_dropout, softmax, softmax_cross_entropy  # noqa: F401
from .model import Model  # noqa: F401
from .optimizers import SGD, Adam, build_optimizer  # noqa: F401
from .repository import ModelRepository, load_model, save_model  # noqa: F401
from .service import (  # noqa: F401
    TrainingService,
    backward,
    batch_slices,
    build_model,
    evaluate,
    forward,
    loss,
    predict,
    train,
)
