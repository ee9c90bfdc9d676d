from typing import Any, Dict, List, Optional
from pathlib import Path
import json
import logging

import numpy as np
import pandas as pd

from src.engine import GameTrace
from src.models import ExperimentConfig, SeedSummary

logger = logging.getLogger(__name__)

BASE_COLUMNS = ["k", "f_bar", "gap_lower", "gap_upper", "regret_pi", "regret_lambda"]
FLOAT_FORMAT = "%.12g"


def trace_columns(num_residuals: int) -> List[str]:
    residuals = [f"residual_{i + 1}" for i in range(num_residuals)]
    return BASE_COLUMNS + residuals + ["samples", "ms"]


def trace_frame(trace: GameTrace) -> pd.DataFrame:
    """One row per iteration, columns in the fixed CSV order."""
    m = len(trace.records[0].residuals) if trace.records else 0
    rows = []
    for r in trace.records:
        row: Dict[str, Any] = {
            "k": r.k,
            "f_bar": r.f_bar,
            "gap_lower": r.gap_lower,
            "gap_upper": r.gap_upper,
            "regret_pi": r.regret_pi,
            "regret_lambda": r.regret_lambda,
        }
        for i, value in enumerate(r.residuals):
            row[f"residual_{i + 1}"] = value
        row["samples"] = r.samples
        row["ms"] = r.ms
        rows.append(row)
    return pd.DataFrame(rows, columns=trace_columns(m))


def seed_summary(config: ExperimentConfig, seed: int, trace: GameTrace) -> SeedSummary:
    final = trace.final
    return SeedSummary(
        name=config.name,
        seed=seed,
        solver=trace.solver,
        objective=trace.objective,
        K=trace.K,
        f_bar=final.f_bar,
        gap_lower=final.gap_lower,
        gap_upper=final.gap_upper,
        regret_pi=final.regret_pi,
        regret_lambda=final.regret_lambda,
        residuals=list(final.residuals),
        d_bar=np.asarray(trace.d_bar).tolist(),
        lambda_bar=np.asarray(trace.lambda_bar).tolist(),
        flags=dict(trace.flags),
        extras=dict(trace.extras),
        config=config.model_dump(mode="json"),
    )


class TraceStore:
    """Writes traces and summaries of one experiment under a directory.

    Layout: trace_seed<seed>.csv, summary_seed<seed>.json and aggregate.json.
    """

    def __init__(self, root: str):
        self.root = Path(root)

    def trace_path(self, seed: int) -> Path:
        return self.root / f"trace_seed{seed}.csv"

    def summary_path(self, seed: int) -> Path:
        return self.root / f"summary_seed{seed}.json"

    @property
    def aggregate_path(self) -> Path:
        return self.root / "aggregate.json"

    # --- Writing ---

    def save_trace(self, seed: int, trace: GameTrace) -> Path:
        path = self.trace_path(seed)
        path.parent.mkdir(parents=True, exist_ok=True)
        trace_frame(trace).to_csv(path, index=False, float_format=FLOAT_FORMAT)
        return path

    def save_summary(self, summary: SeedSummary) -> Path:
        path = self.summary_path(summary.seed)
        self._write_json(path, summary.model_dump(mode="json"))
        return path

    def save_aggregate(self, data: Dict[str, Any]) -> Path:
        self._write_json(self.aggregate_path, data)
        return self.aggregate_path

    def save_json(self, name: str, data: Any) -> Path:
        path = self.root / name
        self._write_json(path, data)
        return path

    # --- Reading ---

    def load_trace(self, seed: int) -> pd.DataFrame:
        return pd.read_csv(self.trace_path(seed))

    def load_summary(self, seed: int) -> Optional[SeedSummary]:
        path = self.summary_path(seed)
        if not path.exists():
            return None
        return SeedSummary(**json.loads(path.read_text()))

    def list_summaries(self) -> List[SeedSummary]:
        return [
            SeedSummary(**json.loads(p.read_text()))
            for p in sorted(self.root.glob("summary_seed*.json"))
        ]

    # --- Persistence ---

    def _write_json(self, path: Path, data: Any):
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(data, indent=2, default=_json_default))


def _json_default(value: Any):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    return str(value)
