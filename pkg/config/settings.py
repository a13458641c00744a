"""
Centralized configuration management for the LULC toolkit.
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Project root directory
ROOT_DIR = Path(__file__).parent.parent

# Artifact locations
DATA_DIR = ROOT_DIR / os.getenv('LULC_DATA_DIR', 'data')
OUTPUT_DIR = ROOT_DIR / os.getenv('LULC_OUTPUT_DIR', 'outputs')

# Application Settings
APP_NAME = os.getenv('APP_NAME', 'LULCToolkit')
LOG_LEVEL = os.getenv('LULC_LOG_LEVEL', 'INFO').upper()

# Randomness
DEFAULT_SEED = int(os.getenv('LULC_SEED', '0'))

# Training protocol (defaults reproduce the reference hyperparameters)
LEARNING_RATE = float(os.getenv('LULC_LEARNING_RATE', '0.0001'))
EPOCHS = int(os.getenv('LULC_EPOCHS', '150'))
BATCH_SIZE = int(os.getenv('LULC_BATCH_SIZE', '32'))
OPTIMIZER = os.getenv('LULC_OPTIMIZER', 'adam').lower()
DROPOUT_RATE = float(os.getenv('LULC_DROPOUT_RATE', '0.3'))
AUGMENT = os.getenv('LULC_AUGMENT', 'True').lower() == 'true'

# Adam hyperparameters
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-7

# Batch normalization
BN_MOMENTUM = float(os.getenv('LULC_BN_MOMENTUM', '0.99'))
BN_EPSILON = 1e-5

# Scale applied to unit embeddings when the embedding variant is trained
COSINE_SOFTMAX_SCALE = 10.0


def _parse_ratios(raw: str) -> tuple:
    """Parse a comma separated train/val/test ratio triple."""
    parts = tuple(float(part) for part in raw.split(','))
    if len(parts) != 3:
        raise ValueError(f"Expected three split ratios, got {raw!r}")
    return parts


SPLIT_RATIOS = _parse_ratios(os.getenv('LULC_SPLIT_RATIOS', '0.70,0.15,0.15'))

# Raster settings
CELL_SIZE = float(os.getenv('LULC_CELL_SIZE', '30'))
STACK_NODATA = float(os.getenv('LULC_STACK_NODATA', '-9999'))
NDWI_FLIP = os.getenv('LULC_NDWI_FLIP', 'False').lower() == 'true'

# Embedding analysis
TSNE_PERPLEXITY = float(os.getenv('LULC_TSNE_PERPLEXITY', '30'))
TSNE_ITERATIONS = int(os.getenv('LULC_TSNE_ITERATIONS', '1000'))
TSNE_LEARNING_RATE = float(os.getenv('LULC_TSNE_LEARNING_RATE', '200'))
TSNE_EARLY_EXAGGERATION = 12.0
TSNE_EXAGGERATION_ITERATIONS = 250
GROUP_THRESHOLD = float(os.getenv('LULC_GROUP_THRESHOLD', '0.1'))

# Map prediction
PREDICT_CHUNK_SIZE = int(os.getenv('LULC_PREDICT_CHUNK_SIZE', '4096'))
