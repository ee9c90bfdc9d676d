import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from src.errors import InsufficientPoints

logger = logging.getLogger(__name__)

MIN_POINTS = 5
MIN_K = 16
SLOPE_FLAG = -0.4
GAP_FLOOR = 1e-12
REFERENCE_FILE = "reference.json"


def fit_rate(ks: Sequence[float], gaps: Sequence[float], confidence: float = 0.95) -> Dict[str, Any]:
    """Least-squares slope of log(gap) against log(K) with a t-interval.

    Raises:
        InsufficientPoints: fewer than five distinct K values
    """
    ks = np.asarray(ks, dtype=float)
    gaps = np.asarray(gaps, dtype=float)
    if np.unique(ks).size < MIN_POINTS:
        raise InsufficientPoints(f"Need at least {MIN_POINTS} K values, got {np.unique(ks).size}")
    fit = stats.linregress(np.log(ks), np.log(np.maximum(gaps, GAP_FLOOR)))
    half = stats.t.ppf(0.5 + confidence / 2.0, ks.size - 2) * fit.stderr
    return {
        "slope": float(fit.slope),
        "intercept": float(fit.intercept),
        "ci_low": float(fit.slope - half),
        "ci_high": float(fit.slope + half),
        "r_squared": float(fit.rvalue ** 2),
        "num_points": int(ks.size),
        "flagged": bool(fit.slope > SLOPE_FLAG),
    }


def gap_series(trace_dir: Path, f_ref: float) -> pd.DataFrame:
    """Seed-averaged f_bar - f_ref at powers of two K >= 16.

    Points with gap <= GAP_FLOOR cannot be fitted in log space. They are
    logged and listed in attrs["dropped_k"].
    """
    frames = [pd.read_csv(p) for p in sorted(trace_dir.glob("trace_seed*.csv"))]
    if not frames:
        return pd.DataFrame(columns=["k", "gap"])
    merged = pd.concat(frames).groupby("k", as_index=False)["f_bar"].mean()
    ks = merged["k"].astype(int)
    keep = (ks >= MIN_K) & ((ks & (ks - 1)) == 0)
    series = merged[keep].copy()
    series["gap"] = series["f_bar"] - f_ref
    fitted = series["gap"] > GAP_FLOOR
    dropped = series.loc[~fitted, "k"].astype(int).tolist()
    if dropped:
        logger.warning(
            f"{trace_dir.name}: dropped K={dropped} with gap <= {GAP_FLOOR:g} against f_ref={f_ref:.12g}"
        )
    result = series.loc[fitted, ["k", "gap"]].reset_index(drop=True)
    result.attrs["dropped_k"] = dropped
    return result


def emit_rate_report(trace_dir: str, output: Optional[str] = None) -> Dict[str, Any]:
    """Fit convergence rates for every configuration directory under trace_dir.

    A configuration directory holds trace_seed*.csv files and optionally a
    reference.json with the reference optimum f_ref (0 when absent).
    """
    root = Path(trace_dir)
    configs = sorted({p.parent for p in root.rglob("trace_seed*.csv")})
    report: Dict[str, Any] = {}
    for config_dir in configs:
        ref_path = config_dir / REFERENCE_FILE
        f_ref = json.loads(ref_path.read_text()).get("f_ref", 0.0) if ref_path.exists() else 0.0
        series = gap_series(config_dir, f_ref)
        name = str(config_dir.relative_to(root)) if config_dir != root else root.name
        fit = fit_rate(series["k"].to_numpy(), series["gap"].to_numpy())
        fit["f_ref"] = f_ref
        fit["dropped_k"] = series.attrs.get("dropped_k", [])
        report[name] = fit
        if fit["flagged"]:
            logger.warning(f"{name}: slope {fit['slope']:.3f} is above {SLOPE_FLAG}")
        else:
            logger.info(f"{name}: slope {fit['slope']:.3f} [{fit['ci_low']:.3f}, {fit['ci_high']:.3f}]")

    out_path = Path(output) if output else root / "rates.json"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(report, indent=2))
    return report


class ReportHandlers:
    """Post-hoc reports over trace directories."""

    def rates(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """
        Fit log(gap) vs log(K) slopes.

        Params:
            in: str - directory produced by the rates suite
            out: str - optional path of the JSON report
        """
        report = emit_rate_report(params["in"], params.get("out"))
        flagged: List[str] = [name for name, fit in report.items() if fit["flagged"]]
        return {"report": report, "flagged": flagged, "exitCode": 0}
