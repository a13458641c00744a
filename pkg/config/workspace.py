"""
Artifact file management.
"""
import logging
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Generator, Union

from config.settings import OUTPUT_DIR

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class ArtifactManager:
    """Manages where and how the toolkit writes its artifacts."""

    def __init__(self, output_dir: Path = OUTPUT_DIR):
        self.output_dir = Path(output_dir)

    def default_path(self, name: str) -> Path:
        """Path of a named artifact inside the configured output directory."""
        return self.output_dir / name

    @contextmanager
    def atomic_write(self, path: PathLike, mode: str = 'wb') -> Generator[IO, None, None]:
        """
        Context manager for writing an artifact.

        Data goes to a temporary file next to the target, which is renamed
        over the target on success and removed on failure.

        Args:
            path: Target path
            mode: 'wb' for binary payloads or 'w' for text

        Yields:
            Open file handle
        """
        if mode not in ('wb', 'w'):
            raise ValueError(f"Unknown write mode: {mode}")

        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f'.{target.name}.', dir=target.parent)
        if mode == 'w':
            handle = os.fdopen(fd, mode, encoding='utf-8', newline='\n')
        else:
            handle = os.fdopen(fd, mode)
        try:
            yield handle
            handle.close()
            os.replace(tmp_name, target)
            logger.debug("Wrote %s", target)
        except BaseException:
            handle.close()
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise

    def write_bytes(self, path: PathLike, payload: bytes) -> Path:
        """Atomically write a binary payload."""
        with self.atomic_write(path, 'wb') as handle:
            handle.write(payload)
        return Path(path)

    def write_text(self, path: PathLike, text: str) -> Path:
        """Atomically write a UTF-8 text document with LF line endings."""
        with self.atomic_write(path, 'w') as handle:
            handle.write(text)
        return Path(path)


# Global artifact manager instance
artifacts = ArtifactManager()
