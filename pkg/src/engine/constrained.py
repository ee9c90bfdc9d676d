"""Constrained convex MDPs: min f(d) s.t. g_i(d) <= 0.

Three players share the Lagrangian
    L = nu . d - f*(nu) + sum_i [zeta_i . d - mu_i g_i*(zeta_i / mu_i)].
The policy player answers the combined cost nu + sum_i zeta_i, one OMD player
ascends (nu, zeta) and another ascends mu in [0, mu_max]^m. Each zeta_i is
kept as mu_i v_i, so zeta_i = 0 whenever mu_i = 0. Each constraint picks the
mirror map of its direction player v_i (see Constraint.direction_step).
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Type

import numpy as np
from scipy.special import xlogy

from src.errors import InfeasibleSuspected, UnsupportedConstraint
from src.mdp import TabularMdp
from src.models.enums import Bregman, ConstraintKind, CostPlayerType
from src.objectives import LOG_FLOOR, ConvexObjective, LinearObjective
from src.players import (
    CostPlayer,
    CostPlayerState,
    PolicyPlayer,
    default_lr_c,
    omd_step,
)

from .game import GameOptions, GameTrace, TraceRecorder, run_game

logger = logging.getLogger(__name__)

PINNED_FRACTION = 0.25


class Constraint(ABC):
    """A convex constraint g(d) <= 0 with a closed-form conjugate."""

    kind: ConstraintKind
    # False when zeta / mu is fixed by the conjugate's domain (linear g)
    has_free_direction = True

    def __init__(self, size: int):
        self.size = size

    @abstractmethod
    def value(self, d: np.ndarray) -> float:
        ...

    @abstractmethod
    def conjugate(self, v: np.ndarray) -> float:
        """g*(v)."""

    @abstractmethod
    def conjugate_gradient(self, v: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def initial_direction(self) -> np.ndarray:
        ...

    @property
    def direction_bound(self) -> float:
        return 1.0

    # step alpha_k = lr_c / k**lr_exp of the direction player; None defers to the game
    direction_lr_exp: Optional[float] = None

    def direction_lr_c(self) -> float:
        return default_lr_c(self.direction_bound, self.size)

    def direction_step(self, v: np.ndarray, d: np.ndarray, alpha: float) -> np.ndarray:
        """Ascend v -> v . d - g*(v) by one projected gradient step on the box."""
        bound = self.direction_bound
        return np.clip(v + alpha * (d - self.conjugate_gradient(v)), -bound, bound)


class LinearConstraint(Constraint):
    """g(d) = lam2 . d - c; its conjugate forces zeta = mu lam2."""

    kind = ConstraintKind.LINEAR
    has_free_direction = False

    def __init__(self, lam2: np.ndarray, c: float):
        self.lam2 = np.asarray(lam2, dtype=float).reshape(-1)
        self.c = float(c)
        super().__init__(self.lam2.size)

    def value(self, d: np.ndarray) -> float:
        return float(self.lam2 @ d) - self.c

    def conjugate(self, v: np.ndarray) -> float:
        return self.c

    def conjugate_gradient(self, v: np.ndarray) -> np.ndarray:
        raise UnsupportedConstraint("Linear constraint has a fixed direction")

    def initial_direction(self) -> np.ndarray:
        return self.lam2.copy()


class EntropyConstraint(Constraint):
    """H(d) >= C written as g(d) = C + sum d log d <= 0.

    g*(v) = sum exp(v - 1) - C.
    """

    kind = ConstraintKind.ENTROPY

    def __init__(self, size: int, min_entropy: float):
        self.min_entropy = float(min_entropy)
        super().__init__(size)

    def value(self, d: np.ndarray) -> float:
        return self.min_entropy + float(xlogy(d, d).sum())

    def conjugate(self, v: np.ndarray) -> float:
        return float(np.exp(v - 1.0).sum()) - self.min_entropy

    def conjugate_gradient(self, v: np.ndarray) -> np.ndarray:
        return np.exp(v - 1.0)

    def initial_direction(self) -> np.ndarray:
        # gradient of g at the uniform vector
        return np.full(self.size, 1.0 + np.log(1.0 / self.size))

    @property
    def direction_bound(self) -> float:
        return 1.0 + abs(np.log(LOG_FLOOR))

    direction_lr_exp = 1.0

    def direction_lr_c(self) -> float:
        return 1.0

    def direction_step(self, v: np.ndarray, d: np.ndarray, alpha: float) -> np.ndarray:
        """Mirror ascent with the Bregman divergence of g* itself.

        w = exp(v - 1) moves towards d by alpha, so with alpha_k = 1 / k it is
        the running average of the occupancies and v = grad g(d_bar).
        """
        alpha = min(alpha, 1.0)
        w = np.exp(v - 1.0)
        w = (1.0 - alpha) * w + alpha * np.asarray(d, dtype=float)
        bound = self.direction_bound
        return np.clip(1.0 + np.log(np.maximum(w, LOG_FLOOR)), -bound, bound)


CONSTRAINT_REGISTRY: Dict[ConstraintKind, Type[Constraint]] = {
    ConstraintKind.LINEAR: LinearConstraint,
    ConstraintKind.ENTROPY: EntropyConstraint,
}


def linear_constraint(lam2, c: float) -> LinearConstraint:
    return LinearConstraint(lam2, c)


def entropy_constraint(size: int, min_entropy: float) -> EntropyConstraint:
    return EntropyConstraint(size, min_entropy)


def make_constraint(kind: str, size: int, **params) -> Constraint:
    """Build a registered constraint.

    Raises:
        UnsupportedConstraint: kind has no closed-form conjugate registered
    """
    try:
        kind = ConstraintKind(kind)
    except ValueError:
        raise UnsupportedConstraint(f"No closed-form conjugate registered for constraint '{kind}'")
    if kind == ConstraintKind.LINEAR:
        return LinearConstraint(params["lam2"], params["c"])
    return EntropyConstraint(size, params["min_entropy"])


@dataclass
class ConstraintSpec:
    constraints: List[Constraint] = field(default_factory=list)
    mu_max: float = 100.0

    @property
    def m(self) -> int:
        return len(self.constraints)


@dataclass
class ConstrainedOptions:
    """Step sizes of the dual players; None picks defaults from the bounds."""
    nu_lr_c: Optional[float] = None
    v_lr_c: Optional[float] = None
    mu_lr_c: float = 1.0
    lr_exp: float = 0.5


def run_constrained_game(
    mdp: TabularMdp,
    objective: ConvexObjective,
    constraints: ConstraintSpec,
    cost_player: CostPlayer,
    policy_player: PolicyPlayer,
    K: int,
    options: Optional[GameOptions] = None,
    dual_options: Optional[ConstrainedOptions] = None,
) -> GameTrace:
    """Three-player game for the constrained problem.

    With no constraints this is run_game. Otherwise cost_player is only used
    to fix the objective: nu is pinned to lam0 for a linear objective and
    ascended by OMD otherwise.

    Raises:
        InfeasibleSuspected: every mu_i sat at mu_max with a positive residual
            over the last quarter of the iterations (the trace is attached)
    """
    if constraints.m == 0:
        return run_game(mdp, objective, cost_player, policy_player, K, options)

    dual = dual_options or ConstrainedOptions()
    recorder = TraceRecorder("constrained", mdp, objective, K, options)
    n, m = objective.size, constraints.m

    pinned_nu = isinstance(objective, LinearObjective)
    nu_bound = objective.grad_bound
    if pinned_nu:
        nu = objective.lam0.copy()
        nu_state = None
    else:
        objective.conjugate_gradient(np.zeros(n))
        nu_state = CostPlayerState(
            CostPlayerType.OGD, n,
            lr_c=dual.nu_lr_c if dual.nu_lr_c is not None else default_lr_c(nu_bound, n),
            lr_exp=dual.lr_exp, bregman=Bregman.L2,
        )
        nu_state.lam = np.zeros(n)
        nu = nu_state.lam

    directions = [c.initial_direction() for c in constraints.constraints]
    v_states: List[Optional[CostPlayerState]] = []
    for c, v in zip(constraints.constraints, directions):
        if not c.has_free_direction:
            v_states.append(None)
            continue
        state = CostPlayerState(
            CostPlayerType.OGD, n,
            lr_c=dual.v_lr_c if dual.v_lr_c is not None else c.direction_lr_c(),
            lr_exp=c.direction_lr_exp if c.direction_lr_exp is not None else dual.lr_exp,
            bregman=Bregman.L2,
        )
        state.lam = np.clip(v, -c.direction_bound, c.direction_bound)
        v_states.append(state)

    mu_state = CostPlayerState(
        CostPlayerType.OGD, m, lr_c=dual.mu_lr_c, lr_exp=dual.lr_exp, bregman=Bregman.L2
    )
    mu_state.lam = np.zeros(m)

    pinned_history: List[bool] = []
    for k in range(1, K + 1):
        mu = mu_state.lam
        zetas = [mu[i] * (v_states[i].lam if v_states[i] is not None else directions[i]) for i in range(m)]
        cost = nu + np.sum(zetas, axis=0)
        scale = max(1.0, float(np.abs(cost).max()))
        normalized = cost / scale
        response = policy_player.respond(normalized, k)
        d = response.d
        nu_k = np.array(nu)

        # dual ascent on the Lagrangian at d
        if nu_state is not None:
            omd_step(nu_state, d - objective.conjugate_gradient(nu_state.lam), "box", nu_bound)
            nu = nu_state.lam
        mu_grad = np.empty(m)
        for i, c in enumerate(constraints.constraints):
            state = v_states[i]
            if state is None:
                mu_grad[i] = c.value(d)
            else:
                v = state.lam
                mu_grad[i] = float(v @ d) - c.conjugate(v)
                state.k += 1
                state.lam = c.direction_step(v, d, state.step_size())
        _mu_step(mu_state, mu_grad, constraints.mu_max)

        d_bar_next = (recorder.d_sum + d) / k
        residuals = [c.value(d_bar_next) for c in constraints.constraints]
        recorder.record(k, nu_k, normalized, response, residuals=residuals)
        pinned_history.append(
            bool(np.all(mu_state.lam >= constraints.mu_max)) and all(r > 0 for r in residuals)
        )
        for name, raised in response.flags.items():
            if raised:
                recorder.flag(name)

    trace = recorder.finish()
    trace.extras["mu"] = mu_state.lam.tolist()
    trace.extras["residuals"] = list(trace.final.residuals)

    tail = pinned_history[int((1.0 - PINNED_FRACTION) * K):]
    if tail and all(tail):
        raise InfeasibleSuspected(
            f"All multipliers pinned at mu_max={constraints.mu_max} with positive residuals "
            f"{trace.final.residuals} over the last {len(tail)} iterations",
            trace=trace,
        )
    logger.info(
        f"Constrained game finished: K={K} f_bar={trace.f_bar:.6g} residuals={trace.final.residuals}"
    )
    return trace


def _mu_step(state: CostPlayerState, grad: np.ndarray, mu_max: float) -> None:
    """Projected ascent of mu onto [0, mu_max]^m."""
    state.k += 1
    state.lam = np.clip(state.lam + state.step_size() * grad, 0.0, mu_max)
