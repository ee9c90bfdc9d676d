#!/usr/bin/env python3
"""
Convex MDP solver entry point

Usage:
    # One experiment, several seeds
    python -m src.main solve --config config/pure_exploration.yaml --seeds 0 1 2 --out runs/pe

    # Canned suites
    python -m src.main suite rates --out runs/rates

    # Rate report over a finished rates suite
    python -m src.main report rates --in runs/rates
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from dotenv import load_dotenv
from pydantic import ValidationError

from src.errors import ConvexMdpError
from src.handlers import ExperimentHandlers, ReportHandlers, SuiteHandlers
from src.models import ExperimentConfig

# Load environment variables
load_dotenv()

# Configure logging
logging.basicConfig(
    level=os.getenv("CONVEX_MDP_LOG_LEVEL", "INFO").upper(),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

SUITES = ["table1", "rates", "diayn", "deepsea"]


def load_config(config_path: str) -> Dict[str, Any]:
    """Load an experiment document from a YAML or JSON file."""
    path = Path(config_path)
    with open(path) as f:
        if path.suffix == ".json":
            return json.load(f)
        return yaml.safe_load(f)


def env_parallel() -> Optional[int]:
    value = os.getenv("CONVEX_MDP_PARALLEL")
    return int(value) if value else None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Convex MDP solver: game, Frank-Wolfe and constrained runs",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="Run one experiment config over seeds")
    solve.add_argument("--config", type=str, required=True, help="Path to YAML or JSON config")
    solve.add_argument("--seeds", type=int, nargs="+", default=None, help="Seeds (overrides config)")
    solve.add_argument("--out", type=str, default=None, help="Output directory (overrides config)")
    solve.add_argument("--parallel", type=int, default=None, help="Worker processes (overrides config)")

    suite = commands.add_parser("suite", help="Run a canned experiment suite")
    suite.add_argument("tag", choices=SUITES)
    suite.add_argument("--out", type=str, default=None, help="Output directory")
    suite.add_argument("--parallel", type=int, default=None, help="Worker processes")

    report = commands.add_parser("report", help="Post-hoc reports")
    report.add_argument("kind", choices=["rates"])
    report.add_argument("--in", dest="input", type=str, required=True, help="Directory of a rates suite")
    report.add_argument("--out", type=str, default=None, help="Path of the JSON report")
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    env_out = os.getenv("CONVEX_MDP_OUT")

    try:
        if args.command == "solve":
            doc = load_config(args.config)
            config = ExperimentConfig(**doc)
            logger.info(f"Loaded config '{config.name}' from {args.config}")
            # CLI > config file > environment
            out = args.out or (doc.get("output_dir") and config.output_dir) or env_out or config.output_dir
            parallel = args.parallel or (doc.get("parallel") and config.parallel) or env_parallel() or config.parallel
            result = ExperimentHandlers().run({
                "config": config,
                "seeds": args.seeds,
                "out": out,
                "parallel": parallel,
            })
            for failure in result["failed"]:
                logger.error(f"seed {failure['seed']}: {failure['error']}")
            return result["exitCode"]

        if args.command == "suite":
            out = args.out or env_out or f"runs/{args.tag}"
            handlers = SuiteHandlers(out, args.parallel or env_parallel() or 1)
            result = getattr(handlers, args.tag)()
            logger.info(f"Suite {args.tag} written to {out}")
            return result["exitCode"]

        result = ReportHandlers().rates({"in": args.input, "out": args.out})
        for name in result["flagged"]:
            logger.warning(f"Rate slower than expected: {name}")
        return result["exitCode"]

    except ValidationError as e:
        logger.error(f"Invalid config: {e}")
        return 2
    except ConvexMdpError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
