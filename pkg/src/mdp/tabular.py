"""Core tabular types: MDPs, policies and occupancy measures.

All three are frozen dataclasses holding read-only numpy arrays, so they can be
shared between games and worker processes without copying.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from src.errors import DimensionMismatch, InvalidMdpError, InvalidPolicyError
from src.models.enums import MdpMode

ROW_TOL = 1e-9


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TabularMdp:
    """Finite MDP with a dense (S, A, S) transition tensor.

    Args:
        transition: P[s, a, s'] probabilities
        mode: average or discounted criterion
        initial_dist: d_0 over states (required in discounted mode)
        discount: gamma in (0, 1) (discounted mode only)
        seed: seed used by the generator that built this MDP, if any
        reward: optional extrinsic reward over S*A (Deep Sea exposes one)
        name: generator name, used when serializing
        params: generator parameters, used when serializing
    """
    transition: np.ndarray
    mode: MdpMode = MdpMode.DISCOUNTED
    initial_dist: Optional[np.ndarray] = None
    discount: Optional[float] = None
    seed: Optional[int] = None
    reward: Optional[np.ndarray] = None
    name: str = "tabular"
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        P = np.asarray(self.transition, dtype=float)
        if P.ndim != 3 or P.shape[0] < 1 or P.shape[1] < 1 or P.shape[2] != P.shape[0]:
            raise InvalidMdpError(f"Transition must have shape (S, A, S), got {P.shape}")
        if np.any(P < 0):
            raise InvalidMdpError("Transition has negative entries")
        row_err = np.abs(P.sum(axis=2) - 1.0).max()
        if row_err > ROW_TOL:
            raise InvalidMdpError(f"Transition rows do not sum to 1 (max error {row_err:.3e})")
        object.__setattr__(self, "transition", _frozen(P))
        object.__setattr__(self, "mode", MdpMode(self.mode))

        S = P.shape[0]
        if self.initial_dist is not None:
            d0 = np.asarray(self.initial_dist, dtype=float)
            if d0.shape != (S,):
                raise InvalidMdpError(f"initial_dist must have length {S}, got {d0.shape}")
            if np.any(d0 < 0) or abs(d0.sum() - 1.0) > ROW_TOL:
                raise InvalidMdpError("initial_dist is not a probability vector")
            object.__setattr__(self, "initial_dist", _frozen(d0))

        if self.mode == MdpMode.DISCOUNTED:
            if self.initial_dist is None:
                raise InvalidMdpError("Discounted mode requires initial_dist")
            if self.discount is None or not 0.0 < self.discount < 1.0:
                raise InvalidMdpError(f"Discount must lie in (0, 1), got {self.discount}")

        if self.reward is not None:
            r = np.asarray(self.reward, dtype=float).reshape(-1)
            if r.shape != (S * P.shape[1],):
                raise DimensionMismatch(f"reward must have length {S * P.shape[1]}")
            object.__setattr__(self, "reward", _frozen(r))

    @property
    def num_states(self) -> int:
        return self.transition.shape[0]

    @property
    def num_actions(self) -> int:
        return self.transition.shape[1]

    @property
    def num_pairs(self) -> int:
        return self.num_states * self.num_actions

    @property
    def start_dist(self) -> np.ndarray:
        """d_0, or uniform when the MDP carries none (average mode)."""
        if self.initial_dist is not None:
            return self.initial_dist
        return np.full(self.num_states, 1.0 / self.num_states)

    def with_mode(self, mode: MdpMode, discount: Optional[float] = None) -> "TabularMdp":
        return TabularMdp(
            transition=self.transition,
            mode=mode,
            initial_dist=self.initial_dist if self.initial_dist is not None else self.start_dist,
            discount=discount if discount is not None else self.discount,
            seed=self.seed,
            reward=self.reward,
            name=self.name,
            params=dict(self.params),
        )


@dataclass(frozen=True)
class Policy:
    """Stationary stochastic policy, probs[s, a]."""
    probs: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.probs, dtype=float)
        if pi.ndim != 2:
            raise InvalidPolicyError(f"Policy must be a 2-D array, got shape {pi.shape}")
        if np.any(pi < 0) or np.abs(pi.sum(axis=1) - 1.0).max() > ROW_TOL:
            raise InvalidPolicyError("Policy rows must be probability vectors")
        object.__setattr__(self, "probs", _frozen(pi))

    @classmethod
    def uniform(cls, num_states: int, num_actions: int) -> "Policy":
        return cls(np.full((num_states, num_actions), 1.0 / num_actions))

    @classmethod
    def deterministic(cls, actions, num_actions: int) -> "Policy":
        actions = np.asarray(actions, dtype=int)
        probs = np.zeros((actions.size, num_actions))
        probs[np.arange(actions.size), actions] = 1.0
        return cls(probs)

    @property
    def num_states(self) -> int:
        return self.probs.shape[0]

    @property
    def num_actions(self) -> int:
        return self.probs.shape[1]

    @property
    def is_deterministic(self) -> bool:
        return bool(np.all((self.probs == 0.0) | (self.probs == 1.0)))

    def greedy_actions(self) -> np.ndarray:
        return np.argmax(self.probs, axis=1)

    def check_compatible(self, mdp: TabularMdp):
        if self.probs.shape != (mdp.num_states, mdp.num_actions):
            raise InvalidPolicyError(
                f"Policy shape {self.probs.shape} does not match MDP "
                f"({mdp.num_states}, {mdp.num_actions})"
            )


@dataclass(frozen=True)
class OccupancyMeasure:
    """State-action occupancy d over S*A, flattened with index s * A + a."""
    d: np.ndarray
    num_states: int
    num_actions: int
    mode: MdpMode = MdpMode.DISCOUNTED

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float).reshape(-1)
        if d.size != self.num_states * self.num_actions:
            raise DimensionMismatch(
                f"Occupancy has {d.size} entries, expected "
                f"{self.num_states * self.num_actions}"
            )
        object.__setattr__(self, "d", _frozen(d))
        object.__setattr__(self, "mode", MdpMode(self.mode))

    @classmethod
    def for_mdp(cls, mdp: TabularMdp, d: np.ndarray) -> "OccupancyMeasure":
        return cls(d=d, num_states=mdp.num_states, num_actions=mdp.num_actions, mode=mdp.mode)

    @property
    def matrix(self) -> np.ndarray:
        return self.d.reshape(self.num_states, self.num_actions)

    @property
    def state_marginal(self) -> np.ndarray:
        return self.matrix.sum(axis=1)
