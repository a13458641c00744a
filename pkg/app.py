"""
Command line entry point for the LULC toolkit.
"""
import logging
import sys
from typing import List, Optional

from src.cli import COMMANDS, PipelineConfig, build_parser
from src.cli.config import CLI_OVERRIDES
from src.core.errors import ToolkitError
from src.core.log_config import configure_logging

logger = logging.getLogger(__name__)


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one subcommand and return its exit code."""
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level)
        overrides = {name: getattr(args, name, None) for name in CLI_OVERRIDES}
        config = PipelineConfig.load(args.config, seed=args.seed, **overrides)
        return COMMANDS[args.command](args, config)
    except ToolkitError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    except FileNotFoundError as exc:
        logger.error("File not found: %s", exc.filename or exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
