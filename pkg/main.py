import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from config import settings, validate_config, get_config_summary
from exceptions import (
    LabException, UsageError, general_exception_handler, lab_exception_handler, validation_exception_handler
)
from routes import diagonal, planar, sweep

# stdout carries datasets, so log records go to stderr
logging.basicConfig(
    level=getattr(logging, settings.LOG_LEVEL.upper(), logging.WARNING),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[logging.StreamHandler(sys.stderr)]
)

if settings.LOG_FILE:
    file_handler = logging.FileHandler(settings.LOG_FILE)
    file_handler.setFormatter(logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    ))
    logging.getLogger().addHandler(file_handler)

logger = logging.getLogger(__name__)

class LabArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)

def build_parser() -> argparse.ArgumentParser:
    parser = LabArgumentParser(
        prog=settings.APP_NAME,
        description="Multiplicative weights in a two-agent congestion game: the maps f_{a,b} and F_{a,b}."
    )
    parser.add_argument("--version", action="version", version=f"{settings.APP_NAME} {settings.APP_VERSION}")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    diagonal.register(subparsers)
    planar.register(subparsers)
    sweep.register(subparsers)
    return parser

def dispatch(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand and return its exit code: 0 success, 2 usage,
    3 domain, 4 not found or undecided, 1 anything else."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required")
        logger.debug(f"Dispatching {args.command}")
        return args.handler(args)
    except LabException as e:
        return lab_exception_handler(e)
    except ValidationError as e:
        return validation_exception_handler(e)
    except SystemExit as e:
        # --help and --version
        return e.code if isinstance(e.code, int) else 0
    except Exception as e:
        return general_exception_handler(e)

def main() -> None:
    try:
        validate_config()
    except ValueError as e:
        logger.error(str(e))
        sys.exit(1)
    logger.info(f"Configuration loaded: {get_config_summary()}")
    sys.exit(dispatch())

if __name__ == "__main__":
    main()
