"""Policy players as seen by the game loop: cost in, occupancy out."""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, Optional, Union

import numpy as np

from src.errors import IncompatiblePlayers
from src.mdp import OccupancyMeasure, Policy, Simulator, TabularMdp, occupancy_of_policy
from src.models.enums import MdpMode, PolicyPlayerType, ToleranceSchedule

from .learning import (
    UCRL2_C_P,
    ConfidenceSet,
    Ucrl2State,
    q_learning_best_response,
    tolerance,
    ucrl2_step,
)
from .policy import best_response

logger = logging.getLogger(__name__)


@dataclass
class PolicyResponse:
    policy: Policy
    occupancy: OccupancyMeasure
    samples: int = 0
    flags: Dict[str, bool] = field(default_factory=dict)

    @property
    def d(self) -> np.ndarray:
        return self.occupancy.d


class PolicyPlayer(ABC):
    """Answers a (normalized) cost vector at iteration k with an occupancy."""

    algorithm: PolicyPlayerType

    def __init__(self, mdp: TabularMdp):
        self.mdp = mdp
        self.k = 0

    @abstractmethod
    def respond(self, cost: np.ndarray, k: int) -> PolicyResponse:
        ...


class BestResponsePlayer(PolicyPlayer):
    algorithm = PolicyPlayerType.BEST_RESPONSE

    def __init__(
        self,
        mdp: TabularMdp,
        tol_schedule: ToleranceSchedule = ToleranceSchedule.CONST,
        tol_c: float = 1e-8,
    ):
        super().__init__(mdp)
        self.tol_schedule = ToleranceSchedule(tol_schedule)
        self.tol_c = tol_c

    def respond(self, cost: np.ndarray, k: int) -> PolicyResponse:
        self.k = k
        result = best_response(self.mdp, cost, tolerance(self.tol_schedule, self.tol_c, k))
        return PolicyResponse(result.policy, result.occupancy)


class QLearningPlayer(PolicyPlayer):
    """Q-learning with budget min(cap, ceil(q_budget / eps_k)) steps at iteration k."""

    algorithm = PolicyPlayerType.Q_LEARNING

    def __init__(
        self,
        mdp: TabularMdp,
        seed: int = 0,
        tol_schedule: ToleranceSchedule = ToleranceSchedule.INV_K,
        tol_c: float = 1.0,
        q_budget: int = 100,
        budget_cap: int = 100_000,
    ):
        super().__init__(mdp)
        self.simulator = Simulator(mdp, seed)
        self.tol_schedule = ToleranceSchedule(tol_schedule)
        self.tol_c = tol_c
        self.q_budget = q_budget
        self.budget_cap = budget_cap
        self.q_table: Optional[np.ndarray] = None

    def budget(self, k: int) -> int:
        eps = tolerance(self.tol_schedule, self.tol_c, k)
        return int(min(self.budget_cap, math.ceil(self.q_budget / eps)))

    def respond(self, cost: np.ndarray, k: int) -> PolicyResponse:
        self.k = k
        result = q_learning_best_response(self.mdp, self.simulator, cost, self.budget(k))
        self.q_table = result.q
        return PolicyResponse(
            result.policy,
            result.occupancy,
            samples=result.samples,
            flags={"budget_too_small": result.budget_too_small},
        )


class Ucrl2Player(PolicyPlayer):
    """Non-stationary UCRL2 with episodes of one step.

    A fresh optimistic policy is computed every iteration by extended value
    iteration with budget t_k = k (or a fixed integer).
    """

    algorithm = PolicyPlayerType.UCRL2

    def __init__(
        self,
        mdp: TabularMdp,
        seed: int = 0,
        delta: float = 0.05,
        evi_budget: Union[str, int] = "k",
        c_p: float = UCRL2_C_P,
    ):
        if mdp.mode != MdpMode.AVERAGE:
            raise IncompatiblePlayers("ucrl2 is an average-reward player; use an average-mode MDP")
        super().__init__(mdp)
        self.state = Ucrl2State(
            confidence=ConfidenceSet(mdp.num_states, mdp.num_actions, delta, c_p),
            simulator=Simulator(mdp, seed),
        )
        self.evi_budget = evi_budget

    def evi_iters(self, k: int) -> int:
        return k if self.evi_budget == "k" else int(self.evi_budget)

    def respond(self, cost: np.ndarray, k: int) -> PolicyResponse:
        self.k = k
        policy, _ = ucrl2_step(self.state, cost, self.evi_iters(k))
        return PolicyResponse(policy, occupancy_of_policy(self.mdp, policy), samples=1)
