"""Exact best response by (relative) value iteration."""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.mdp import OccupancyMeasure, Policy, TabularMdp, occupancy_of_policy
from src.models.enums import MdpMode

logger = logging.getLogger(__name__)

TIE_TOL = 1e-9
APERIODIC_TAU = 0.5
MAX_SWEEPS = 1_000_000


@dataclass(frozen=True)
class ValueFunction:
    """State values v (relative values in average mode) and the gain."""
    v: np.ndarray
    gain: Optional[float] = None
    residual: float = 0.0
    iterations: int = 0


@dataclass(frozen=True)
class BestResponse:
    policy: Policy
    occupancy: OccupancyMeasure
    value: ValueFunction

    @property
    def d(self) -> np.ndarray:
        return self.occupancy.d


def greedy(q: np.ndarray, tie_tol: float = TIE_TOL) -> np.ndarray:
    """Lowest-index action within tie_tol of the row maximum."""
    mask = q >= q.max(axis=1, keepdims=True) - tie_tol
    return np.argmax(mask, axis=1)


def _reward_matrix(mdp: TabularMdp, reward) -> np.ndarray:
    return np.asarray(reward, dtype=float).reshape(mdp.num_states, mdp.num_actions)


def value_iteration(
    mdp: TabularMdp, reward, tol: float, max_iters: int = MAX_SWEEPS
) -> tuple:
    """Discounted value iteration until the sup-norm residual is at most
    tol (1 - gamma) / (2 gamma). Returns (q, ValueFunction)."""
    r = _reward_matrix(mdp, reward)
    gamma = mdp.discount
    threshold = tol * (1.0 - gamma) / (2.0 * gamma)
    v = np.zeros(mdp.num_states)
    residual = np.inf
    for it in range(1, max_iters + 1):
        q = r + gamma * mdp.transition @ v
        v_new = q.max(axis=1)
        residual = float(np.abs(v_new - v).max())
        v = v_new
        if residual <= threshold:
            break
    else:
        logger.warning(f"Value iteration hit {max_iters} sweeps (residual {residual:.2e})")
    q = r + gamma * mdp.transition @ v
    return q, ValueFunction(v=v, residual=residual, iterations=it)


def relative_value_iteration(
    mdp: TabularMdp, reward, tol: float, max_iters: int = MAX_SWEEPS, tau: float = APERIODIC_TAU
) -> tuple:
    """Average-reward relative value iteration on tau I + (1 - tau) P.

    The mixed kernel has the same stationary distributions and gains as P and
    is aperiodic, so the span of the Bellman residual converges. Stops when
    that span is at most tol. Returns (q, ValueFunction).
    """
    r = _reward_matrix(mdp, reward)
    h = np.zeros(mdp.num_states)
    span = np.inf
    diff = np.zeros(mdp.num_states)
    for it in range(1, max_iters + 1):
        q = r + tau * h[:, None] + (1.0 - tau) * (mdp.transition @ h)
        th = q.max(axis=1)
        diff = th - h
        span = float(diff.max() - diff.min())
        h = th - th[0]
        if span <= tol:
            break
    else:
        logger.warning(f"Relative value iteration hit {max_iters} sweeps (span {span:.2e})")
    q = r + (1.0 - tau) * (mdp.transition @ h)
    gain = 0.5 * float(diff.max() + diff.min())
    return q, ValueFunction(v=h, gain=gain, residual=span, iterations=it)


def best_response(mdp: TabularMdp, cost, tol: float = 1e-8) -> BestResponse:
    """Deterministic policy maximizing d . (-cost) over the occupancy polytope
    to within tol, with its exact occupancy."""
    lam = np.asarray(getattr(cost, "lam", cost), dtype=float).reshape(-1)
    reward = -lam
    if mdp.mode == MdpMode.DISCOUNTED:
        q, value = value_iteration(mdp, reward, tol)
    else:
        q, value = relative_value_iteration(mdp, reward, tol)
    policy = Policy.deterministic(greedy(q), mdp.num_actions)
    return BestResponse(policy, occupancy_of_policy(mdp, policy), value)


def optimal_reward(mdp: TabularMdp, reward, tol: float = 1e-10) -> float:
    """max_{d in K} r . d, evaluated on the best-response occupancy."""
    response = best_response(mdp, -np.asarray(reward, dtype=float), tol)
    return float(np.dot(reward, response.d))
