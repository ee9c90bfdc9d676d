"""Sampling access to an MDP for learning players, plus return estimators."""

import logging
import math
from typing import Tuple

import numpy as np

from src.models.enums import MdpMode

from .tabular import Policy, TabularMdp

logger = logging.getLogger(__name__)


class Simulator:
    """Seeded one-step sampler.

    Learning players only call reset/step; they never read the kernel. In
    discounted mode the episode restarts from d_0 with probability 1 - gamma
    after every step, so visitation follows the discounted occupancy.
    """

    def __init__(self, mdp: TabularMdp, seed: int = 0):
        self._mdp = mdp
        self.rng = np.random.default_rng(seed)
        self.num_states = mdp.num_states
        self.num_actions = mdp.num_actions
        self.mode = mdp.mode
        self.discount = mdp.discount
        self.steps = 0
        self.state = self.reset()

    def reset(self) -> int:
        self.state = int(self.rng.choice(self.num_states, p=self._mdp.start_dist))
        return self.state

    def step(self, action: int) -> int:
        """Take action from the current state; returns the next state."""
        row = self._mdp.transition[self.state, action]
        next_state = int(self.rng.choice(self.num_states, p=row))
        self.steps += 1
        self.state = next_state
        if self.mode == MdpMode.DISCOUNTED and self.rng.random() > self.discount:
            self.reset()
        return next_state


def rollout_average_reward(
    mdp: TabularMdp,
    policy: Policy,
    reward: np.ndarray,
    steps: int,
    seed: int = 0,
    batches: int = 50,
) -> Tuple[float, float]:
    """Monte Carlo average reward along one long trajectory.

    Returns (mean, standard error) using batch means.
    """
    rng = np.random.default_rng(seed)
    r = np.asarray(reward, dtype=float).reshape(mdp.num_states, mdp.num_actions)
    cum_pi = np.cumsum(policy.probs, axis=1)
    cum_p = np.cumsum(mdp.transition, axis=2)
    u_action = rng.random(steps)
    u_next = rng.random(steps)

    state = int(rng.choice(mdp.num_states, p=mdp.start_dist))
    rewards = np.empty(steps)
    for t in range(steps):
        a = min(int(np.searchsorted(cum_pi[state], u_action[t], side="right")), mdp.num_actions - 1)
        rewards[t] = r[state, a]
        state = min(int(np.searchsorted(cum_p[state, a], u_next[t], side="right")), mdp.num_states - 1)

    batch_means = rewards[: steps - steps % batches].reshape(batches, -1).mean(axis=1)
    return float(rewards.mean()), float(batch_means.std(ddof=1) / math.sqrt(batches))


def truncated_discounted_value(
    mdp: TabularMdp, policy: Policy, reward: np.ndarray, eps: float = 1e-8
) -> float:
    """(1 - gamma) sum_t gamma^t E[r_t], propagating the state distribution
    forward for log(eps) / log(gamma) steps."""
    gamma = mdp.discount
    horizon = int(math.ceil(math.log(eps) / math.log(gamma)))
    r_pi = (policy.probs * np.asarray(reward).reshape(mdp.num_states, mdp.num_actions)).sum(axis=1)
    chain = np.einsum("sa,sat->st", policy.probs, mdp.transition)
    dist = mdp.initial_dist.copy()
    total = 0.0
    weight = 1.0
    for _ in range(horizon):
        total += weight * float(dist @ r_pi)
        dist = dist @ chain
        weight *= gamma
    return (1.0 - gamma) * total
