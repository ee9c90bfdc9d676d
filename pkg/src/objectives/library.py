"""Convex objectives over occupancy measures.

Each objective works on the flattened S*A occupancy. Entropy-type gradients
floor d at LOG_FLOOR so boundary points of the polytope get a finite
subgradient.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import rel_entr, xlogy

from src.errors import ExpertSupportViolation, IncompatiblePlayers
from src.mdp import OccupancyMeasure, TabularMdp, validate_occupancy

from .base import LOG_FLOOR, ConvexObjective

LOG_FLOOR_ABS = abs(math.log(LOG_FLOOR))


@dataclass(frozen=True)
class ExpertOccupancy:
    """Expert occupancy d_E; exact=False marks an empirical estimate."""
    d: np.ndarray
    exact: bool = True

    @classmethod
    def from_measure(cls, occupancy: OccupancyMeasure) -> "ExpertOccupancy":
        return cls(d=np.array(occupancy.d), exact=True)

    def validate(self, mdp: TabularMdp):
        return validate_occupancy(mdp, self.d) if self.exact else []


ExpertLike = Union[ExpertOccupancy, OccupancyMeasure, np.ndarray]


def _expert_vector(d_E: ExpertLike) -> np.ndarray:
    return np.asarray(getattr(d_E, "d", d_E), dtype=float).reshape(-1).copy()


def smooth_expert(d_E: ExpertLike, eps: float = 1e-6) -> np.ndarray:
    """Mix d_E with the uniform vector: (1 - eps) d_E + eps / n."""
    d = _expert_vector(d_E)
    return (1.0 - eps) * d + eps / d.size


class LinearObjective(ConvexObjective):
    """f(d) = lam0 . d; minimizing it is standard RL with reward -lam0."""

    name = "linear"

    def __init__(self, lam0: np.ndarray):
        self.lam0 = np.asarray(lam0, dtype=float).reshape(-1)
        super().__init__(self.lam0.size)

    def value(self, d) -> float:
        return float(np.dot(self.lam0, self._check(d)))

    def gradient(self, d) -> np.ndarray:
        self._check(d)
        return self.lam0.copy()

    @property
    def grad_bound(self) -> float:
        bound = float(np.abs(self.lam0).max())
        return bound if bound > 0.0 else 1.0


class NegEntropyObjective(ConvexObjective):
    """f(d) = sum d log d (0 log 0 = 0); minimized by maximum-entropy exploration."""

    name = "neg_entropy"

    def value(self, d) -> float:
        d = self._check(d)
        return float(xlogy(d, d).sum())

    def gradient(self, d) -> np.ndarray:
        d = self._check(d)
        return 1.0 + np.log(np.maximum(d, LOG_FLOOR))

    @property
    def grad_bound(self) -> float:
        return 1.0 + LOG_FLOOR_ABS

    def conjugate_gradient(self, lam: np.ndarray) -> np.ndarray:
        return np.exp(lam - 1.0)


class L2ApprenticeshipObjective(ConvexObjective):
    """f(d) = ||d - d_E||_2^2."""

    name = "l2_al"

    def __init__(self, d_E: ExpertLike):
        self.d_E = _expert_vector(d_E)
        super().__init__(self.d_E.size)

    def value(self, d) -> float:
        diff = self._check(d) - self.d_E
        return float(diff @ diff)

    def gradient(self, d) -> np.ndarray:
        return 2.0 * (self._check(d) - self.d_E)

    @property
    def grad_bound(self) -> float:
        return 2.0

    def conjugate_gradient(self, lam: np.ndarray) -> np.ndarray:
        return self.d_E + 0.5 * lam


class KlObjective(ConvexObjective):
    """f(d) = KL(d || d_E); d_E must be strictly positive (see smooth_expert)."""

    name = "kl"

    def __init__(self, d_E: ExpertLike):
        d_E = _expert_vector(d_E)
        zeros = np.flatnonzero(d_E <= 0.0)
        if zeros.size:
            raise ExpertSupportViolation(
                f"Expert occupancy has {zeros.size} zero entries (first at {zeros[0]}); "
                "smooth it with smooth_expert first"
            )
        self.d_E = d_E
        self.log_d_E = np.log(d_E)
        super().__init__(d_E.size)

    def value(self, d) -> float:
        return float(rel_entr(self._check(d), self.d_E).sum())

    def gradient(self, d) -> np.ndarray:
        d = self._check(d)
        return 1.0 + np.log(np.maximum(d, LOG_FLOOR)) - self.log_d_E

    @property
    def grad_bound(self) -> float:
        return 1.0 + LOG_FLOOR_ABS + float(np.abs(self.log_d_E).max())

    def conjugate_gradient(self, lam: np.ndarray) -> np.ndarray:
        return self.d_E * np.exp(lam - 1.0)


class LinfApprenticeshipGame(ConvexObjective):
    """||d - d_E||_inf, exposed only in game form.

    The payoff is lam . (d - d_E) with lam in the unit L1 ball; its max over the
    ball is the sup-norm. There is no usable gradient, so only mirror-descent
    cost players can play it.
    """

    name = "linf_al"
    smooth = False
    dual_set = "l1_ball"

    def __init__(self, d_E: ExpertLike):
        self.d_E = _expert_vector(d_E)
        super().__init__(self.d_E.size)

    def value(self, d) -> float:
        return float(np.abs(self._check(d) - self.d_E).max())

    def payoff(self, d, lam: np.ndarray) -> float:
        return float(np.dot(lam, self._check(d) - self.d_E))

    def gradient(self, d) -> np.ndarray:
        raise IncompatiblePlayers("linf_al is a game objective; use the ogd or mw cost player")

    @property
    def grad_bound(self) -> float:
        return 1.0

    def conjugate_gradient(self, lam: np.ndarray) -> np.ndarray:
        return self.d_E.copy()


class GailObjective(ConvexObjective):
    """Two-skill DIAYN with the expert as the fixed second skill.

    With a uniform prior the objective reduces to the Jensen-Shannon divergence
    between the agent's and the expert's state marginals.
    """

    name = "gail"

    def __init__(self, d_E: ExpertLike, num_states: int, num_actions: int):
        d_E = _expert_vector(d_E)
        self.num_states = num_states
        self.num_actions = num_actions
        self.expert_states = d_E.reshape(num_states, num_actions).sum(axis=1)
        super().__init__(num_states * num_actions)

    def _agent_states(self, d) -> np.ndarray:
        return self._check(d).reshape(self.num_states, self.num_actions).sum(axis=1)

    def value(self, d) -> float:
        q = self._agent_states(d)
        m = 0.5 * (q + self.expert_states)
        return float(0.5 * rel_entr(q, m).sum() + 0.5 * rel_entr(self.expert_states, m).sum())

    def gradient(self, d) -> np.ndarray:
        q = self._agent_states(d)
        total = q + self.expert_states
        posterior = np.maximum(q, LOG_FLOOR) / np.maximum(total, LOG_FLOOR)
        per_state = 0.5 * (np.log(posterior) + math.log(2.0))
        return np.repeat(per_state, self.num_actions)

    @property
    def grad_bound(self) -> float:
        return 0.5 * (LOG_FLOOR_ABS + math.log(2.0))


def linear_objective(lam0) -> LinearObjective:
    return LinearObjective(lam0)


def neg_entropy_objective(size: int) -> NegEntropyObjective:
    return NegEntropyObjective(size)


def l2_apprenticeship_objective(d_E: ExpertLike) -> L2ApprenticeshipObjective:
    return L2ApprenticeshipObjective(d_E)


def linf_apprenticeship_game(d_E: ExpertLike) -> LinfApprenticeshipGame:
    return LinfApprenticeshipGame(d_E)


def kl_objective(d_E: ExpertLike) -> KlObjective:
    return KlObjective(d_E)


def gail_objective(d_E: ExpertLike, num_states: int, num_actions: int) -> GailObjective:
    return GailObjective(d_E, num_states, num_actions)
