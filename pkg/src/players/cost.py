"""Cost players: online learners over the dual variable lambda.

FTL plays the gradient at the running-average occupancy. OMD takes a
mirror-ascent step on the Lagrangian, either projected gradient ascent
(squared-Euclidean Bregman) or multiplicative weights (entropy Bregman).
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Iterable, List, Optional

import numpy as np

from src.errors import BregmanDomainError, DimensionMismatch, IncompatiblePlayers
from src.models.enums import Bregman, CostPlayerType
from src.objectives import ConjugateGrid, ConvexObjective

logger = logging.getLogger(__name__)

BOX_SLACK = 1e-12


@dataclass(frozen=True)
class CostVector:
    """A dual iterate lambda with the radius of its constraint set."""
    lam: np.ndarray
    bound: float
    dual_set: str = "box"

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float).reshape(-1)
        if self.dual_set == "box" and np.abs(lam).max(initial=0.0) > self.bound + BOX_SLACK:
            raise ValueError(f"Cost vector leaves the box of radius {self.bound}")
        object.__setattr__(self, "lam", lam)

    @property
    def normalized(self) -> np.ndarray:
        """lam / bound, the cost handed to policy players."""
        return self.lam / self.bound


@dataclass
class CostPlayerState:
    """Mutable state of one cost player; owned by a single game."""
    algorithm: CostPlayerType
    size: int
    k: int = 0
    d_sum: Optional[np.ndarray] = None
    lam: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    lr_c: float = 1.0
    lr_exp: float = 0.5
    bregman: Bregman = Bregman.L2
    initial_point: Optional[np.ndarray] = None

    def step_size(self) -> float:
        return self.lr_c / self.k ** self.lr_exp


def default_lr_c(bound: float, size: int) -> float:
    return bound * math.sqrt(1.0 / size)


# --- projections ---


def project_box(v: np.ndarray, b: float) -> np.ndarray:
    """Euclidean projection onto [-b, b]^n."""
    if b <= 0:
        raise ValueError(f"Box radius must be positive, got {b}")
    return np.clip(v, -b, b)


def project_simplex(v: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Euclidean projection onto {w >= 0, sum w = radius}."""
    u = np.sort(v)[::-1]
    cum = np.cumsum(u) - radius
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - cum / idx > 0)[0][-1]
    theta = cum[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def project_l1_ball(v: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Euclidean projection onto {||w||_1 <= radius}."""
    if np.abs(v).sum() <= radius:
        return v.copy()
    return np.sign(v) * project_simplex(np.abs(v), radius)


# --- updates ---


def ftl_step(state: CostPlayerState, objective: ConvexObjective, new_d: Optional[np.ndarray]) -> CostVector:
    """Record new_d (if any) and return grad f at the running-average occupancy.

    Before any occupancy is observed the gradient is taken at
    state.initial_point, or at the uniform vector of mass 1 when none is set.
    """
    if state.d_sum is None:
        state.d_sum = np.zeros(state.size)
    if new_d is not None:
        state.d_sum = state.d_sum + np.asarray(new_d, dtype=float).reshape(-1)
        state.k += 1
    if state.k:
        point = state.d_sum / state.k
    elif state.initial_point is not None:
        point = state.initial_point
    else:
        point = np.full(state.size, 1.0 / state.size)
    bound = objective.grad_bound
    lam = project_box(objective.gradient(point), bound)
    state.lam = lam
    return CostVector(lam, bound)


def omd_step(
    state: CostPlayerState,
    grad_lambda: np.ndarray,
    dual_set: str = "box",
    bound: float = 1.0,
) -> CostVector:
    """One mirror-ascent step with alpha_k = lr_c / k**lr_exp.

    Squared-Euclidean Bregman projects onto the box or the L1 ball. Entropy
    Bregman runs multiplicative weights on the simplex, or on 2n signed experts
    (lam = w[:n] - w[n:]) for the L1 ball.
    """
    g = np.asarray(grad_lambda, dtype=float).reshape(-1)
    n = g.size
    if state.lam is None:
        state.lam = initial_lambda(n, dual_set, bound)
    state.k += 1
    alpha = state.step_size()

    if Bregman(state.bregman) == Bregman.L2:
        if dual_set == "box":
            lam = project_box(state.lam + alpha * g, bound)
        elif dual_set == "l1_ball":
            lam = project_l1_ball(state.lam + alpha * g, bound)
        elif dual_set == "simplex":
            lam = project_simplex(state.lam + alpha * g, bound)
        else:
            raise ValueError(f"Unknown dual set: {dual_set}")
        state.lam = lam
        return CostVector(lam, bound, dual_set)

    if dual_set == "box":
        raise BregmanDomainError("Entropy Bregman needs a simplex or L1-ball dual set, not a box")
    if dual_set == "simplex":
        if state.weights is None:
            state.weights = state.lam / bound
        logits = np.log(np.maximum(state.weights, 1e-300)) + alpha * g
        w = np.exp(logits - logits.max())
        state.weights = w / w.sum()
        lam = bound * state.weights
    elif dual_set == "l1_ball":
        if state.weights is None:
            state.weights = np.full(2 * n, 1.0 / (2 * n))
        signed = np.concatenate([g, -g])
        logits = np.log(np.maximum(state.weights, 1e-300)) + alpha * signed
        w = np.exp(logits - logits.max())
        state.weights = w / w.sum()
        lam = bound * (state.weights[:n] - state.weights[n:])
    else:
        raise ValueError(f"Unknown dual set: {dual_set}")
    state.lam = lam
    return CostVector(lam, bound, dual_set)


def initial_lambda(size: int, dual_set: str, bound: float) -> np.ndarray:
    if dual_set == "simplex":
        return np.full(size, bound / size)
    return np.zeros(size)


# --- regret ---


def comparator_regret(
    played_sum: float,
    d_sum: np.ndarray,
    k: int,
    comparators: Iterable[np.ndarray],
    conj_grid: ConjugateGrid,
) -> float:
    """(1/k)[max_lam sum_j L(d^j, lam) - sum_j L(d^j, lam^j)] over comparators."""
    best = max(float(c @ d_sum) - k * conj_grid.conjugate(c) for c in comparators)
    return (best - played_sum) / k


def cost_player_regret(
    trace,
    candidate_grid: Optional[Iterable[np.ndarray]],
    conj_grid: ConjugateGrid,
) -> float:
    """Average regret of the cost player over a finite comparator set.

    The comparators are candidate_grid plus grad f at the final average
    occupancy when the objective is smooth. Losses are -L(d^k, .), with f*
    estimated on conj_grid.
    """
    lambdas = np.asarray(trace.lambdas)
    occupancies = np.asarray(trace.occupancies)
    K = lambdas.shape[0]
    played = sum(float(l @ d) - conj_grid.conjugate(l) for l, d in zip(lambdas, occupancies))
    comparators: List[np.ndarray] = [np.asarray(c, dtype=float) for c in (candidate_grid or [])]
    objective = conj_grid.objective
    if objective.smooth:
        comparators.append(project_box(objective.gradient(occupancies.mean(axis=0)), objective.grad_bound))
    if not comparators:
        comparators = list(lambdas)
    return comparator_regret(played, occupancies.sum(axis=0), K, comparators, conj_grid)


# --- players ---


class CostPlayer(ABC):
    """propose() the next lambda; observe() the policy player's answer."""

    def __init__(self, objective: ConvexObjective, state: CostPlayerState):
        self.objective = objective
        self.state = state

    @abstractmethod
    def propose(self) -> CostVector:
        ...

    @abstractmethod
    def observe(self, d: np.ndarray) -> None:
        ...


class FtlCostPlayer(CostPlayer):
    """Follow the leader. initial_point replaces the uniform cold start; the
    skill-discovery game needs an asymmetric one, since every skill answers a
    symmetric cost identically."""

    def __init__(self, objective: ConvexObjective, initial_point: Optional[np.ndarray] = None):
        if not objective.smooth:
            raise IncompatiblePlayers(f"ftl needs a gradient; {objective.name} has none")
        state = CostPlayerState(CostPlayerType.FTL, objective.size)
        if initial_point is not None:
            state.initial_point = np.asarray(initial_point, dtype=float).reshape(-1)
            if state.initial_point.size != objective.size:
                raise DimensionMismatch(
                    f"initial_point has {state.initial_point.size} entries, objective needs {objective.size}"
                )
        super().__init__(objective, state)
        self._next = ftl_step(self.state, objective, None)

    def propose(self) -> CostVector:
        return self._next

    def observe(self, d: np.ndarray) -> None:
        self._next = ftl_step(self.state, self.objective, d)


class OmdCostPlayer(CostPlayer):
    """Mirror ascent on lam -> L(d, lam) = lam . d - f*(lam)."""

    def __init__(
        self,
        objective: ConvexObjective,
        bregman: Bregman = Bregman.L2,
        lr_c: Optional[float] = None,
        lr_exp: float = 0.5,
    ):
        bregman = Bregman(bregman)
        algorithm = CostPlayerType.MW if bregman == Bregman.ENTROPY else CostPlayerType.OGD
        bound = objective.grad_bound
        if bregman == Bregman.ENTROPY and objective.dual_set == "box":
            raise BregmanDomainError(
                f"mw needs a simplex or L1-ball dual set; {objective.name} uses a box"
            )
        # fail fast when f* has no gradient
        objective.conjugate_gradient(np.zeros(objective.size))
        state = CostPlayerState(
            algorithm,
            objective.size,
            lr_c=default_lr_c(bound, objective.size) if lr_c is None else lr_c,
            lr_exp=lr_exp,
            bregman=bregman,
        )
        state.lam = initial_lambda(objective.size, objective.dual_set, bound)
        super().__init__(objective, state)
        self.bound = bound

    def propose(self) -> CostVector:
        return CostVector(self.state.lam, self.bound, self.objective.dual_set)

    def observe(self, d: np.ndarray) -> None:
        grad = np.asarray(d, dtype=float).reshape(-1) - self.objective.conjugate_gradient(self.state.lam)
        omd_step(self.state, grad, self.objective.dual_set, self.bound)
