"""Learning policy players: tabular Q-learning and non-stationary UCRL2.

Both players touch the environment only through a Simulator. The occupancy
they report is the exact occupancy of the policy they settle on.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from src.mdp import OccupancyMeasure, Policy, Simulator, TabularMdp, occupancy_of_policy
from src.models.enums import MdpMode, ToleranceSchedule

from .policy import APERIODIC_TAU, ValueFunction, greedy

logger = logging.getLogger(__name__)

Q_LR_EXPONENT = 0.7
RADIUS_CAP = 2.0
UCRL2_C_P = 14.0


def tolerance(schedule: ToleranceSchedule, c: float, k: int) -> float:
    """Accuracy eps_k demanded of the policy player at iteration k >= 1."""
    schedule = ToleranceSchedule(schedule)
    if schedule == ToleranceSchedule.CONST:
        return c
    if schedule == ToleranceSchedule.INV_K:
        return c / k
    return c / math.sqrt(k)


# --- Q-learning ---


@dataclass
class QLearningResult:
    policy: Policy
    occupancy: OccupancyMeasure
    q: np.ndarray
    samples: int
    budget_too_small: bool = False


@dataclass
class GreedyWatch:
    """Tracks whether any greedy action moves away from a reference policy.

    Once a change is seen it stays recorded, even if the action later reverts.
    """
    reference: np.ndarray
    changed: bool = False

    def update(self, state: int, q_row: np.ndarray) -> None:
        if not self.changed and int(greedy(q_row.reshape(1, -1))[0]) != int(self.reference[state]):
            self.changed = True


def q_learning_best_response(
    mdp: TabularMdp,
    simulator: Simulator,
    cost,
    budget: int,
) -> QLearningResult:
    """Approximate best response to cost by tabular Q-learning.

    Explores eps-greedily with eps_t = 1 / sqrt(t) and learns with rate
    1 / N(s, a)**0.7. Discounted mode uses the standard target
    r + gamma max Q(s'); average mode uses relative Q-learning with the mean
    of Q as reference. The returned occupancy is exact (computed from mdp),
    the learning itself only uses the simulator.

    budget_too_small is set when any greedy action changes during the last
    10% of the budget.
    """
    if budget < 1:
        raise ValueError(f"Q-learning budget must be >= 1, got {budget}")
    S, A = simulator.num_states, simulator.num_actions
    reward = -np.asarray(getattr(cost, "lam", cost), dtype=float).reshape(S, A)
    discounted = simulator.mode == MdpMode.DISCOUNTED
    gamma = simulator.discount if discounted else 1.0
    rng = simulator.rng

    Q = np.zeros((S, A))
    N = np.zeros((S, A))
    checkpoint = max(int(0.9 * budget), 1)
    watch: Optional[GreedyWatch] = None

    state = simulator.state
    explore = rng.random(budget)
    random_actions = rng.integers(0, A, size=budget)
    for t in range(1, budget + 1):
        if explore[t - 1] < 1.0 / math.sqrt(t):
            action = int(random_actions[t - 1])
        else:
            action = int(greedy(Q[state:state + 1])[0])
        next_state = simulator.step(action)
        N[state, action] += 1
        lr = 1.0 / N[state, action] ** Q_LR_EXPONENT
        if discounted:
            target = reward[state, action] + gamma * Q[next_state].max()
        else:
            target = reward[state, action] - Q.mean() + Q[next_state].max()
        Q[state, action] += lr * (target - Q[state, action])
        if watch is not None:
            watch.update(state, Q[state])
        elif t == checkpoint:
            watch = GreedyWatch(greedy(Q))
        state = simulator.state

    final = greedy(Q)
    too_small = budget >= 10 and watch is not None and watch.changed
    if too_small:
        logger.warning(f"Greedy policy still changing in the last 10% of a {budget}-step budget")
    policy = Policy.deterministic(final, A)
    return QLearningResult(policy, occupancy_of_policy(mdp, policy), Q, budget, too_small)


# --- UCRL2 ---


class ConfidenceSet:
    """Empirical transitions with per-(s, a) L1 confidence radii.

    beta(s, a) = sqrt(c_p S log(t / delta) / max(1, N(s, a))), capped at 2.
    """

    def __init__(self, num_states: int, num_actions: int, delta: float = 0.05, c_p: float = UCRL2_C_P):
        self.num_states = num_states
        self.num_actions = num_actions
        self.delta = delta
        self.c_p = c_p
        self.transition_counts = np.zeros((num_states, num_actions, num_states))
        self.t = 0

    @property
    def counts(self) -> np.ndarray:
        return self.transition_counts.sum(axis=2)

    def update(self, state: int, action: int, next_state: int) -> None:
        self.transition_counts[state, action, next_state] += 1
        self.t += 1

    def p_hat(self) -> np.ndarray:
        counts = self.counts
        uniform = np.full(self.num_states, 1.0 / self.num_states)
        p = np.empty_like(self.transition_counts)
        seen = counts > 0
        p[seen] = self.transition_counts[seen] / counts[seen][:, None]
        p[~seen] = uniform
        return p

    def radius(self) -> np.ndarray:
        log_term = math.log(max(self.t, 1) / self.delta)
        beta = np.sqrt(self.c_p * self.num_states * log_term / np.maximum(1.0, self.counts))
        return np.minimum(beta, RADIUS_CAP)


def optimistic_transition(p_hat: np.ndarray, radius: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Maximize p . u over the L1 ball of the given radius around p_hat.

    Adds radius / 2 to the highest-u successor (capped at 1) and removes the
    same mass from the lowest-u successors first. Vectorized over (s, a).
    """
    order = np.argsort(u, kind="stable")
    best = order[-1]
    others = order[:-1]
    p = np.array(p_hat, dtype=float, copy=True)
    add = np.minimum(radius / 2.0, 1.0 - p[..., best])
    p[..., best] += add
    p_sorted = p[..., others]
    cum = np.cumsum(p_sorted, axis=-1)
    remove = np.clip(add[..., None] - (cum - p_sorted), 0.0, p_sorted)
    p[..., others] = p_sorted - remove
    return p


def extended_value_iteration(
    conf: ConfidenceSet,
    reward,
    iters: int,
    tau: float = APERIODIC_TAU,
) -> Tuple[ValueFunction, Policy, np.ndarray]:
    """Optimistic average-reward value iteration over the confidence set.

    Starts from u = 0 and stops after iters sweeps or when
    span(u_{i+1} - u_i) <= 1 / sqrt(iters). Returns the value, the greedy
    optimistic policy and the maximizing transition kernel.
    """
    S, A = conf.num_states, conf.num_actions
    r = np.asarray(reward, dtype=float).reshape(S, A)
    p_hat = conf.p_hat()
    radius = conf.radius()
    stop = 1.0 / math.sqrt(max(iters, 1))

    u = np.zeros(S)
    p = p_hat
    diff = np.zeros(S)
    for i in range(1, max(iters, 1) + 1):
        p = optimistic_transition(p_hat, radius, u)
        q = r + tau * u[:, None] + (1.0 - tau) * (p @ u)
        u_new = q.max(axis=1)
        diff = u_new - u
        u = u_new - u_new.min()
        if diff.max() - diff.min() <= stop:
            break
    p = optimistic_transition(p_hat, radius, u)
    q = r + (1.0 - tau) * (p @ u)
    policy = Policy.deterministic(greedy(q), A)
    gain = 0.5 * float(diff.max() + diff.min())
    value = ValueFunction(v=u, gain=gain, residual=float(diff.max() - diff.min()), iterations=i)
    return value, policy, p


@dataclass
class Ucrl2State:
    """Per-game UCRL2 state: confidence set, simulator and step counter."""
    confidence: ConfidenceSet
    simulator: Simulator
    k: int = 0
    value: Optional[ValueFunction] = None


def ucrl2_step(state: Ucrl2State, cost, evi_iters: int) -> Tuple[Policy, Tuple[int, int, int]]:
    """Compute the optimistic policy for reward -cost, act one step with it
    and update the confidence set. Returns (policy, (s, a, s'))."""
    conf = state.confidence
    reward = -np.asarray(getattr(cost, "lam", cost), dtype=float)
    value, policy, _ = extended_value_iteration(conf, reward, evi_iters)
    sim = state.simulator
    s = sim.state
    a = int(policy.greedy_actions()[s])
    s_next = sim.step(a)
    conf.update(s, a, s_next)
    state.k += 1
    state.value = value
    return policy, (s, a, s_next)


def policy_player_regret(trace) -> float:
    """(1/K) sum_k (J*_k - J_k) from the trace's optimal and realized rewards."""
    optimal = np.asarray(trace.optimal_rewards, dtype=float)
    realized = np.asarray(trace.realized_rewards, dtype=float)
    return float(np.mean(optimal - realized))
