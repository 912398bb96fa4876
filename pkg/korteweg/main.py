"""Точка входа: python -m korteweg.main <подкоманда> --config <путь> --out <каталог>."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from korteweg.config import settings
from korteweg.errors import KortewegError
from korteweg.handlers import setup_handlers
from korteweg.models import ExperimentConfig

logging.basicConfig(
    level=settings.log_level,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

SUBCOMMANDS = ("simulate", "lifespan-study", "convergence-study", "lp-analyze")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="korteweg", description="Korteweg Lab")
    parser.add_argument("command", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, type=Path, help="JSON-манифест")
    parser.add_argument("--out", type=Path, default=None, help="каталог для артефактов")
    parser.add_argument("--seed", type=int, default=None, help="переопределяет seed манифеста")
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    return parser


def load_config(path: Path, seed: Optional[int] = None) -> ExperimentConfig:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if seed is not None:
        data["seed"] = seed
    return ExperimentConfig.model_validate(data)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.seed)
    except ValidationError as e:
        for error in e.errors():
            location = ".".join(str(part) for part in error["loc"]) or "<root>"
            logger.error("Invalid config field %s: %s", location, error["msg"])
        return 2
    except (OSError, json.JSONDecodeError) as e:
        logger.error("Cannot read config %s: %s", args.config, e)
        return 2

    out_dir = args.out or config.output_dir or Path(settings.default_output_dir)
    fmt = args.format or config.formats[0]
    handler = setup_handlers()[args.command]
    logger.info("Running %s (seed=%d) into %s", args.command, config.seed, out_dir)
    try:
        return handler(config, out_dir, fmt)
    except KortewegError as e:
        logger.error("%s failed: %s", args.command, e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
