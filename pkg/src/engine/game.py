"""The game loop: a cost player against a policy player, with averaging and
duality-gap accounting.

Gap bounds and regrets are evaluated at checkpoints (powers of two and the
final iteration); f(d_bar) and the Lagrangian are logged every iteration.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import IterationBudgetZero
from src.mdp import TabularMdp
from src.objectives import ConjugateGrid, ConvexObjective, random_occupancy_grid
from src.players import (
    BestResponsePlayer,
    CostPlayer,
    PolicyPlayer,
    PolicyResponse,
    best_response,
    comparator_regret,
    project_box,
)

logger = logging.getLogger(__name__)

SANDWICH_TOL = 1e-8


@dataclass
class GameOptions:
    """Knobs shared by every solver that produces a GameTrace."""
    grid_size: int = 32
    grid_seed: int = 0
    oracle_tol: float = 1e-10
    track_policy_regret: bool = True
    record_wall_time: bool = False


@dataclass
class IterationRecord:
    """One CSV row. Gap and regret fields are None between checkpoints."""
    k: int
    f_bar: float
    lagrangian: float
    gap_lower: Optional[float] = None
    gap_upper: Optional[float] = None
    regret_pi: Optional[float] = None
    regret_lambda: Optional[float] = None
    residuals: Tuple[float, ...] = ()
    samples: int = 0
    ms: Optional[float] = None


@dataclass
class GameTrace:
    """Everything a run produced: per-iteration records, iterates and averages."""
    solver: str
    objective: str
    is_convex: bool
    records: List[IterationRecord] = field(default_factory=list)
    lambdas: List[np.ndarray] = field(default_factory=list)
    occupancies: List[np.ndarray] = field(default_factory=list)
    optimal_rewards: List[float] = field(default_factory=list)
    realized_rewards: List[float] = field(default_factory=list)
    d_bar: Optional[np.ndarray] = None
    lambda_bar: Optional[np.ndarray] = None
    flags: Dict[str, Any] = field(default_factory=dict)
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def K(self) -> int:
        return len(self.records)

    @property
    def final(self) -> IterationRecord:
        return self.records[-1]

    @property
    def f_bar(self) -> float:
        return self.final.f_bar

    @property
    def gap(self) -> Tuple[float, float]:
        return self.final.gap_lower, self.final.gap_upper

    def f_bar_series(self) -> np.ndarray:
        return np.array([r.f_bar for r in self.records])

    def checkpoints(self) -> List[IterationRecord]:
        return [r for r in self.records if r.gap_upper is not None]


def is_checkpoint(k: int, K: int) -> bool:
    return k == K or (k & (k - 1)) == 0


def lagrangian_value(d, lam, objective: ConvexObjective, conj_grid: ConjugateGrid) -> float:
    """L(d, lam) = lam . d - f*(lam), with f* estimated on conj_grid."""
    d = np.asarray(getattr(d, "d", d), dtype=float).reshape(-1)
    lam = np.asarray(getattr(lam, "lam", lam), dtype=float).reshape(-1)
    return float(lam @ d) - conj_grid.conjugate(lam)


def duality_gap(
    trace: GameTrace,
    objective: ConvexObjective,
    mdp: TabularMdp,
    conj_grid: Optional[ConjugateGrid] = None,
    tol: float = 1e-10,
) -> Tuple[float, float]:
    """(lower, upper) with upper = f(d_bar) and lower = min_d L(d, lambda_bar).

    The minimum over d is one best response at cost lambda_bar. The conjugate
    grid always contains d_bar, which keeps lower <= upper.
    """
    if conj_grid is None:
        conj_grid = ConjugateGrid(objective, random_occupancy_grid(mdp, 32))
        conj_grid.extend(trace.occupancies)
    else:
        conj_grid = conj_grid.copy()
    conj_grid.add(trace.d_bar)
    return _gap_bounds(mdp, objective, trace.d_bar, trace.lambda_bar, conj_grid, tol)


def _gap_bounds(mdp, objective, d_bar, lambda_bar, conj_grid, tol) -> Tuple[float, float]:
    upper = objective.value(d_bar)
    scale = max(float(np.abs(lambda_bar).max(initial=0.0)), 1e-300)
    d_min = best_response(mdp, lambda_bar / scale, tol).d
    lower = float(lambda_bar @ d_min) - conj_grid.conjugate(lambda_bar)
    if lower > upper + SANDWICH_TOL:
        logger.warning(f"Weak-duality sandwich violated: lower {lower:.6g} > upper {upper:.6g}")
    return lower, upper


class TraceRecorder:
    """Accumulates iterates into a GameTrace and fills checkpoint statistics.

    Used by every solver so that all traces share one layout.
    """

    def __init__(
        self,
        solver: str,
        mdp: TabularMdp,
        objective: ConvexObjective,
        K: int,
        options: Optional[GameOptions] = None,
        oracle_for_policy: bool = True,
    ):
        if K < 1:
            raise IterationBudgetZero(f"{solver} needs at least one iteration, got K={K}")
        self.mdp = mdp
        self.objective = objective
        self.K = K
        self.options = options or GameOptions()
        self.oracle_for_policy = oracle_for_policy and self.options.track_policy_regret
        self.trace = GameTrace(solver=solver, objective=objective.name, is_convex=objective.is_convex)
        base = random_occupancy_grid(mdp, self.options.grid_size, self.options.grid_seed)
        self.base_grid = ConjugateGrid(objective, base)
        self.gap_grid = self.base_grid.copy()
        self.d_sum = np.zeros(objective.size)
        self.lam_sum = np.zeros(objective.size)
        self.played_sum = 0.0
        self._started = time.perf_counter()

    def record(
        self,
        k: int,
        lam: np.ndarray,
        normalized_cost: np.ndarray,
        response: PolicyResponse,
        d_bar: Optional[np.ndarray] = None,
        residuals: Sequence[float] = (),
    ) -> IterationRecord:
        d = response.d
        self.trace.lambdas.append(np.array(lam))
        self.trace.occupancies.append(np.array(d))
        self.d_sum += d
        self.lam_sum += lam
        d_bar = self.d_sum / k if d_bar is None else d_bar
        lambda_bar = self.lam_sum / k

        lagrangian = lagrangian_value(d, lam, self.objective, self.base_grid)
        self.played_sum += lagrangian
        self.gap_grid.add(d)

        realized = float(-normalized_cost @ d)
        if self.oracle_for_policy:
            optimal = float(-normalized_cost @ best_response(self.mdp, normalized_cost, self.options.oracle_tol).d)
        else:
            optimal = realized
        self.trace.realized_rewards.append(realized)
        self.trace.optimal_rewards.append(max(optimal, realized))

        record = IterationRecord(
            k=k,
            f_bar=self.objective.value(d_bar),
            lagrangian=lagrangian,
            residuals=tuple(float(r) for r in residuals),
            samples=response.samples,
        )
        if self.options.record_wall_time:
            now = time.perf_counter()
            record.ms = 1000.0 * (now - self._started)
            self._started = now

        if is_checkpoint(k, self.K):
            self.gap_grid.add(d_bar)
            record.gap_lower, record.gap_upper = _gap_bounds(
                self.mdp, self.objective, d_bar, lambda_bar, self.gap_grid, self.options.oracle_tol
            )
            comparators = [lambda_bar, np.array(lam)]
            if self.objective.smooth:
                comparators.append(project_box(self.objective.gradient(d_bar), self.objective.grad_bound))
            record.regret_lambda = comparator_regret(self.played_sum, self.d_sum, k, comparators, self.base_grid)
            record.regret_pi = float(
                np.mean(np.array(self.trace.optimal_rewards) - np.array(self.trace.realized_rewards))
            )
            logger.debug(
                f"{self.trace.solver} k={k} f_bar={record.f_bar:.6g} "
                f"gap=[{record.gap_lower:.6g}, {record.gap_upper:.6g}]"
            )

        self.trace.records.append(record)
        self.trace.d_bar = np.array(d_bar)
        self.trace.lambda_bar = lambda_bar
        return record

    def flag(self, name: str, value: Any = True) -> None:
        self.trace.flags[name] = value

    def finish(self) -> GameTrace:
        trace = self.trace
        if not trace.is_convex:
            lower, upper = trace.gap
            trace.extras["nonconvex_bounds"] = {
                "lagrangian_at_average": lagrangian_value(
                    trace.d_bar, trace.lambda_bar, self.objective, self.gap_grid
                ),
                "lower": lower,
                "upper": upper,
            }
        return trace


def run_game(
    mdp: TabularMdp,
    objective: ConvexObjective,
    cost_player: CostPlayer,
    policy_player: PolicyPlayer,
    K: int,
    options: Optional[GameOptions] = None,
) -> GameTrace:
    """Play K rounds: lambda^k from the cost player, d^k from the policy player
    answering -lambda^k / grad_bound. Returns the full trace with averages."""
    recorder = TraceRecorder(
        "game",
        mdp,
        objective,
        K,
        options,
        oracle_for_policy=not isinstance(policy_player, BestResponsePlayer),
    )
    for k in range(1, K + 1):
        cost = cost_player.propose()
        normalized = cost.normalized
        response = policy_player.respond(normalized, k)
        cost_player.observe(response.d)
        recorder.record(k, cost.lam, normalized, response)
        for name, raised in response.flags.items():
            if raised:
                recorder.flag(name)

    trace = recorder.finish()
    logger.info(
        f"Game finished: objective={objective.name} K={K} f_bar={trace.f_bar:.6g} "
        f"gap=[{trace.final.gap_lower:.6g}, {trace.final.gap_upper:.6g}]"
    )
    return trace
