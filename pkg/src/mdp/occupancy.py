"""Occupancy measures: policy -> occupancy, occupancy -> policy, polytope checks."""

import itertools
import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from src.errors import AverageModeNotUnichain, DimensionMismatch
from src.models.enums import MdpMode

from .tabular import OccupancyMeasure, Policy, TabularMdp

logger = logging.getLogger(__name__)

POLYTOPE_TOL = 1e-8
ZERO_MARGINAL = 1e-12
STATIONARY_TOL = 1e-12


@dataclass(frozen=True)
class Violation:
    """One violated polytope constraint.

    kind is "negativity", "mass" or "flow"; index is the (flattened) pair for
    negativity, the state for flow, and None for mass. residual is absolute.
    """
    kind: str
    index: Optional[int]
    residual: float


def induced_chain(mdp: TabularMdp, policy: Policy) -> np.ndarray:
    """State transition matrix P_pi[s, s'] of the chain induced by policy."""
    return np.einsum("sa,sat->st", policy.probs, mdp.transition)


def count_recurrent_classes(chain: np.ndarray) -> int:
    """Number of closed strongly connected components of a Markov chain."""
    graph = csr_matrix(chain > 0.0)
    n_comp, labels = connected_components(graph, directed=True, connection="strong")
    closed = np.ones(n_comp, dtype=bool)
    rows, cols = graph.nonzero()
    leaving = labels[rows] != labels[cols]
    closed[np.unique(labels[rows[leaving]])] = False
    return int(closed.sum())


def stationary_distribution(chain: np.ndarray) -> np.ndarray:
    """Stationary distribution of a unichain Markov chain.

    Raises:
        AverageModeNotUnichain: more than one recurrent class
    """
    n_recurrent = count_recurrent_classes(chain)
    if n_recurrent > 1:
        raise AverageModeNotUnichain(n_recurrent)

    S = chain.shape[0]
    system = np.vstack([chain.T - np.eye(S), np.ones((1, S))])
    rhs = np.zeros(S + 1)
    rhs[-1] = 1.0
    rho, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    rho = np.clip(rho, 0.0, None)
    rho /= rho.sum()

    residual = np.abs(rho @ chain - rho).max()
    if residual > STATIONARY_TOL * max(1, S):
        logger.warning(f"Stationary solve residual {residual:.2e} above tolerance")
    return rho


def state_occupancy(mdp: TabularMdp, policy: Policy) -> np.ndarray:
    chain = induced_chain(mdp, policy)
    if mdp.mode == MdpMode.DISCOUNTED:
        gamma = mdp.discount
        system = np.eye(mdp.num_states) - gamma * chain.T
        rho = np.linalg.solve(system, (1.0 - gamma) * mdp.initial_dist)
        return np.clip(rho, 0.0, None)
    return stationary_distribution(chain)


def occupancy_of_policy(mdp: TabularMdp, policy: Policy) -> OccupancyMeasure:
    """Exact occupancy measure d_pi of a stationary policy.

    Discounted mode solves the flow equations directly; average mode takes the
    stationary distribution of the induced chain after a unichain check.
    """
    policy.check_compatible(mdp)
    rho = state_occupancy(mdp, policy)
    d = rho[:, None] * policy.probs
    return OccupancyMeasure.for_mdp(mdp, d.reshape(-1))


def policy_of_occupancy(occupancy: OccupancyMeasure) -> Policy:
    """pi(s, a) = d(s, a) / sum_a d(s, a), uniform where the marginal vanishes."""
    matrix = occupancy.matrix
    marginal = matrix.sum(axis=1)
    probs = np.full_like(matrix, 1.0 / occupancy.num_actions)
    visited = marginal > ZERO_MARGINAL
    probs[visited] = matrix[visited] / marginal[visited, None]
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum(axis=1, keepdims=True)
    return Policy(probs)


def flow_residuals(mdp: TabularMdp, d: np.ndarray) -> np.ndarray:
    """Signed per-state residual of the occupancy-polytope flow equalities."""
    matrix = d.reshape(mdp.num_states, mdp.num_actions)
    outflow = matrix.sum(axis=1)
    inflow = np.einsum("sa,sat->t", matrix, mdp.transition)
    if mdp.mode == MdpMode.DISCOUNTED:
        inflow = (1.0 - mdp.discount) * mdp.initial_dist + mdp.discount * inflow
    return outflow - inflow


def validate_occupancy(mdp: TabularMdp, d, tol: float = POLYTOPE_TOL) -> List[Violation]:
    """Every violated occupancy-polytope constraint with its residual.

    Raises:
        DimensionMismatch: d does not have S*A entries
    """
    if isinstance(d, OccupancyMeasure):
        d = d.d
    d = np.asarray(d, dtype=float).reshape(-1)
    if d.size != mdp.num_pairs:
        raise DimensionMismatch(f"Expected {mdp.num_pairs} entries, got {d.size}")

    violations = [
        Violation("negativity", int(i), float(-d[i]))
        for i in np.flatnonzero(d < -tol)
    ]
    mass_err = abs(d.sum() - 1.0)
    if mass_err > tol:
        violations.append(Violation("mass", None, float(mass_err)))
    flow = np.abs(flow_residuals(mdp, d))
    violations.extend(
        Violation("flow", int(s), float(flow[s])) for s in np.flatnonzero(flow > tol)
    )
    return violations


def enumerate_deterministic_policies(mdp: TabularMdp) -> Iterator[Policy]:
    """All A**S deterministic policies, in lexicographic order of actions."""
    for actions in itertools.product(range(mdp.num_actions), repeat=mdp.num_states):
        yield Policy.deterministic(actions, mdp.num_actions)


def expected_reward(mdp: TabularMdp, policy: Policy, reward: np.ndarray) -> float:
    """J_pi = r . d_pi, the normalized return in either mode."""
    return float(np.dot(reward, occupancy_of_policy(mdp, policy).d))
