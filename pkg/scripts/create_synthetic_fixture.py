#!/usr/bin/env python
"""
Create synthetic fixtures in the data directory.

Writes a separable 13-channel fixture, a fixture with two confusable
class pairs, and the reference grouping document, so every command of
the toolkit can be tried without real imagery.
"""
import sys
from pathlib import Path

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from config.settings import DATA_DIR, DEFAULT_SEED  # noqa: E402
from src.features.embedding_analysis import write_grouping  # noqa: E402
from src.features.patchset import PatchSetService  # noqa: E402
from src.features.synthetic import FixtureSpec, SyntheticService  # noqa: E402
from src.models.evaluation import REFERENCE_GROUPING  # noqa: E402


def create_fixture(name: str, spec: FixtureSpec, seed: int) -> None:
    """Write stack, labels and a split patch set under DATA_DIR/name."""
    target = DATA_DIR / name
    target.mkdir(parents=True, exist_ok=True)
    stack, labels = SyntheticService().create_fixture(spec, target / 'stack', target / 'labels', seed=seed)
    patchset = PatchSetService().create_patchset(target / 'stack', target / 'labels', target / 'patches', seed=seed)
    print(f"[OK] {name}: {stack.width}x{stack.height}, {stack.channel_count} channels, "
          f"{len(labels.catalog)} classes, {len(patchset)} patches")


if __name__ == "__main__":
    print(f"Creating synthetic fixtures in {DATA_DIR}...\n")
    create_fixture('separable', FixtureSpec(num_classes=6, width=72, height=72), DEFAULT_SEED)
    create_fixture(
        'confusable',
        FixtureSpec(num_classes=8, width=72, height=72, confusable_pairs=[(4, 5), (6, 7)], pair_offset=0.25),
        DEFAULT_SEED,
    )
    write_grouping(REFERENCE_GROUPING, DATA_DIR / 'reference_groups.json')
    print("[OK] Reference grouping written")
    print("\n[SUCCESS] Fixtures created successfully!")
    print("\nNext step: python app.py train --patches data/separable/patches --output outputs/model")
