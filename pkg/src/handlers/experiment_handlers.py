import asyncio
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from src.engine import GameTrace, solve
from src.errors import ConvexMdpError, InfeasibleSuspected
from src.models import ExperimentConfig
from src.store import TraceStore, seed_summary

logger = logging.getLogger(__name__)

AGGREGATE_FIELDS = ["f_bar", "gap_lower", "gap_upper", "regret_pi", "regret_lambda"]


def solve_seed(config_doc: Dict[str, Any], seed: int) -> Tuple[int, Optional[GameTrace], Optional[str]]:
    """Run one (config, seed) job. Module-level so worker processes can pickle it."""
    config = ExperimentConfig(**config_doc)
    try:
        return seed, solve(config, seed), None
    except InfeasibleSuspected as e:
        return seed, e.trace, str(e)
    except ConvexMdpError as e:
        return seed, None, f"{type(e).__name__}: {e}"


async def run_seeds(config: ExperimentConfig, seeds: List[int], parallel: int) -> List[Tuple[int, Optional[GameTrace], Optional[str]]]:
    """Solve every seed, fanning out to worker processes when parallel > 1."""
    doc = config.model_dump(mode="json")
    if parallel <= 1 or len(seeds) == 1:
        return [solve_seed(doc, seed) for seed in seeds]

    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=min(parallel, len(seeds))) as pool:
        jobs = [loop.run_in_executor(pool, solve_seed, doc, seed) for seed in seeds]
        return list(await asyncio.gather(*jobs))


def aggregate_summaries(rows: List[Dict[str, Any]]) -> Dict[str, Any]:
    """Mean and standard error across seeds of every scalar result."""
    frame = pd.DataFrame(rows)
    n = len(frame)
    out: Dict[str, Any] = {"num_seeds": n}
    for column in frame.columns:
        if column == "seed":
            continue
        values = pd.to_numeric(frame[column], errors="coerce").dropna()
        if values.empty:
            continue
        stderr = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
        out[column] = {"mean": float(values.mean()), "stderr": stderr}
    return out


class ExperimentHandlers:
    """Runs experiment configs and writes their artifacts."""

    def __init__(self, output_dir: Optional[str] = None, parallel: Optional[int] = None):
        self.output_dir = output_dir
        self.parallel = parallel

    def run(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """
        Run every seed of an experiment.

        Params:
            config: ExperimentConfig or Dict - experiment document
            seeds: List[int] - overrides config.seeds
            out: str - overrides config.output_dir
            parallel: int - overrides config.parallel
        """
        config = params["config"]
        if not isinstance(config, ExperimentConfig):
            config = ExperimentConfig(**config)
        seeds = params.get("seeds") or config.seeds
        out = params.get("out") or self.output_dir or config.output_dir
        parallel = params.get("parallel") or self.parallel or config.parallel

        store = TraceStore(out)
        results = asyncio.run(run_seeds(config, seeds, parallel))

        artifacts: List[str] = []
        failed: List[Dict[str, Any]] = []
        rows: List[Dict[str, Any]] = []
        for seed, trace, error in results:
            if trace is not None:
                artifacts.append(str(store.save_trace(seed, trace)))
                summary = seed_summary(config, seed, trace)
                if error:
                    summary.flags["error"] = error
                artifacts.append(str(store.save_summary(summary)))
                row = {"seed": seed, **{f: getattr(summary, f) for f in AGGREGATE_FIELDS}}
                for i, value in enumerate(summary.residuals):
                    row[f"residual_{i + 1}"] = value
                rows.append(row)
            if error:
                logger.error(f"{config.name} seed {seed} failed: {error}")
                failed.append({"seed": seed, "error": error})

        aggregate = aggregate_summaries(rows) if rows else {"num_seeds": 0}
        aggregate["name"] = config.name
        aggregate["failed"] = failed
        artifacts.append(str(store.save_aggregate(aggregate)))
        logger.info(f"{config.name}: wrote {len(artifacts)} artifacts to {out}")

        return {
            "exitCode": 1 if failed else 0,
            "artifacts": artifacts,
            "aggregate": aggregate,
            "failed": failed,
        }
