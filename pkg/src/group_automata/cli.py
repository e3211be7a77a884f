from __future__ import annotations

import argparse
import logging
from collections.abc import Sequence
from pathlib import Path

from group_automata.errors import GroupAutomataError

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("simulate", "cesaro", "regen-stats", "density", "lemma41", "verify")


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        description="Simulate group automata started from chains with complete connections"
    )
    parser.add_argument(
        "command",
        choices=SUBCOMMANDS,
        help="Experiment to run",
    )
    parser.add_argument(
        "--config",
        type=Path,
        help="Experiment configuration file (optional for verify)",
    )
    parser.add_argument(
        "--seed",
        type=int,
        help="Seed of the counter-based uniform stream (overrides the config)",
    )
    parser.add_argument(
        "--out",
        help="CSV output path (default: stdout)",
    )
    parser.add_argument(
        "--mode",
        choices=["exact", "mc"],
        help="Exact or Monte Carlo computation for cesaro",
    )
    parser.add_argument(
        "--section",
        help="Run only this section of the verify suite",
    )
    parser.add_argument(
        "--inject-fault",
        action="store_true",
        help="Make verify use a multiple of p as mu",
    )
    parser.add_argument(
        "--debug",
        action="store_true",
        help="Enable debug logging",
    )
    args = parser.parse_args(argv)

    command: str = args.command
    config_path: Path | None = args.config
    debug: bool = args.debug

    if debug:
        logging.basicConfig(
            level=logging.DEBUG,
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        )
        logger.debug("Debug logging enabled")

    if config_path is None and command != "verify":
        logger.error("%s needs --config", command)
        return 2

    from .commands import COMMANDS
    from .config import load_config
    from .config import parse_config

    overrides = {
        "command": command,
        "seed": args.seed,
        "out": args.out,
        "section": args.section,
        "experiment.mode": args.mode,
        "verify.inject_fault": True if args.inject_fault else None,
    }

    try:
        if config_path is None:
            config = parse_config("", overrides)
        else:
            config = load_config(config_path, overrides)
        logger.info("Running %s with seed %d", command, config.seed)
        report = COMMANDS[command](config)
        report.write(config.out)
    except GroupAutomataError as e:
        logger.error("%s failed: %s", command, e)
        return e.exit_code
    except Exception as e:
        logger.error("%s crashed: %s", command, e, exc_info=True)
        return 1

    if report.failure:
        logger.error("%s: %s", command, report.failure)
        return 4

    logger.info("%s finished", command)
    return 0
