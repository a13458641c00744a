"""
Synthetic fixture feature package.
"""

from .service import FixtureSpec, SyntheticService, class_means, generate_fixture, parse_pairs  # noqa: F401
