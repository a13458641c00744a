"""
Pytest configuration and shared fixtures.
"""
import numpy as np
import pytest

from src.features.patchset.service import extract_homogeneous, split
from src.features.synthetic.service import FixtureSpec, generate_fixture
from src.models.evaluation import ConfusionMatrix
from src.models.network import ArchitectureDescriptor
from src.models.raster import ClassCatalog

# Published 17-class test confusion matrix, rows true / columns predicted,
# in baseline catalog order (32, 2, 1, 3, 7, 9, 15, 5, 34, 28, 12, 13, 31, 29, 35, 30, 26)
BASELINE_COUNTS = [
    [192, 0, 0, 0, 0, 1, 0, 0, 1, 1, 6, 0, 1, 3, 0, 1, 1],
    [0, 85, 6, 29, 36, 0, 3, 0, 4, 3, 10, 7, 0, 1, 1, 0, 0],
    [0, 0, 200, 0, 10, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 28, 0, 54, 15, 0, 4, 0, 31, 15, 12, 16, 2, 3, 0, 0, 0],
    [0, 8, 14, 4, 158, 0, 0, 0, 0, 0, 0, 7, 1, 0, 4, 0, 0],
    [0, 0, 0, 0, 0, 167, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0],
    [0, 1, 0, 2, 0, 0, 156, 0, 0, 16, 1, 0, 1, 6, 0, 0, 0],
    [0, 2, 0, 0, 0, 0, 16, 145, 0, 1, 3, 0, 0, 0, 4, 0, 21],
    [0, 3, 0, 9, 1, 1, 6, 0, 80, 25, 15, 9, 10, 8, 1, 0, 0],
    [0, 4, 4, 13, 0, 0, 45, 0, 19, 67, 3, 0, 2, 23, 3, 2, 0],
    [0, 5, 0, 12, 1, 4, 6, 1, 16, 4, 106, 21, 4, 1, 2, 0, 0],
    [0, 0, 0, 3, 3, 1, 0, 0, 0, 0, 5, 194, 0, 0, 0, 0, 0],
    [1, 1, 0, 2, 0, 0, 0, 1, 6, 6, 6, 2, 127, 3, 1, 14, 13],
    [2, 2, 0, 0, 0, 0, 13, 3, 18, 14, 4, 4, 4, 89, 20, 17, 1],
    [0, 2, 0, 1, 4, 2, 7, 0, 4, 2, 6, 1, 4, 6, 125, 5, 1],
    [0, 0, 0, 0, 0, 1, 3, 2, 0, 2, 2, 0, 11, 5, 3, 148, 0],
    [0, 0, 0, 0, 0, 2, 0, 11, 0, 0, 0, 0, 4, 1, 1, 1, 152],
]

# (id, precision, recall, f1, support) rows of the reference baseline report
BASELINE_REPORT = [
    (32, 0.98, 0.93, 0.96, 207), (2, 0.60, 0.46, 0.52, 185), (1, 0.89, 0.95, 0.92, 210),
    (3, 0.42, 0.30, 0.35, 180), (7, 0.69, 0.81, 0.75, 196), (9, 0.93, 0.99, 0.96, 169),
    (15, 0.60, 0.85, 0.71, 183), (5, 0.89, 0.76, 0.82, 192), (34, 0.45, 0.48, 0.46, 168),
    (28, 0.43, 0.36, 0.39, 185), (12, 0.59, 0.58, 0.58, 183), (13, 0.74, 0.94, 0.83, 206),
    (31, 0.74, 0.69, 0.72, 183), (29, 0.60, 0.47, 0.52, 191), (35, 0.76, 0.74, 0.75, 170),
    (30, 0.79, 0.84, 0.81, 177), (26, 0.80, 0.88, 0.84, 172),
]


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: end-to-end training runs (deselect with -m "not slow")')


@pytest.fixture
def baseline_catalog():
    """Return the 17-class baseline catalog."""
    return ClassCatalog.baseline()


@pytest.fixture
def baseline_confusion(baseline_catalog):
    """Return the reference baseline confusion matrix."""
    return ConfusionMatrix(np.array(BASELINE_COUNTS), baseline_catalog)


@pytest.fixture
def three_class_catalog():
    """Return a small catalog with ids 1..3."""
    return ClassCatalog.from_ids([1, 2, 3], ['forest', 'water', 'urban'])


@pytest.fixture
def fixture_spec():
    """Return a small well-separated fixture geometry."""
    return FixtureSpec(num_classes=3, width=36, height=36, tile=6, channels=4, separation=8.0)


@pytest.fixture
def synthetic_rasters(fixture_spec):
    """Return (stack, labels) of the small synthetic fixture."""
    return generate_fixture(fixture_spec, seed=7)


@pytest.fixture
def small_patchset(synthetic_rasters):
    """Return a split patch set built from the small fixture."""
    stack, labels = synthetic_rasters
    patches = extract_homogeneous(stack, labels, labels.catalog)
    return split(patches, labels.catalog, stack.channels, seed=7)


@pytest.fixture
def baseline_descriptor():
    """Return the reference 13-channel, 17-class classifier architecture."""
    return ArchitectureDescriptor(input_channels=13, num_classes=17)


@pytest.fixture
def rng():
    """Return a seeded random generator."""
    return np.random.default_rng(1234)
