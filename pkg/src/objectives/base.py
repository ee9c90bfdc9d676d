"""Objective interface shared by every convex-MDP objective."""

from abc import ABC, abstractmethod

import numpy as np

from src.errors import DimensionMismatch, IncompatiblePlayers

LOG_FLOOR = 1e-12


class ConvexObjective(ABC):
    """A function f of the state-action occupancy.

    Subclasses provide value and gradient; grad_bound is a sup-norm bound on
    gradients over the occupancy polytope and sets the radius of the cost box.
    conjugate_gradient is only needed by mirror-descent cost players.
    """

    name = "objective"
    is_convex = True
    smooth = True
    # "box" for the sup-norm box of radius grad_bound, "l1_ball" for the unit L1 ball
    dual_set = "box"

    def __init__(self, size: int):
        self.size = size

    def _check(self, d) -> np.ndarray:
        d = np.asarray(getattr(d, "d", d), dtype=float).reshape(-1)
        if d.size != self.size:
            raise DimensionMismatch(f"{self.name} expects {self.size} entries, got {d.size}")
        return d

    @abstractmethod
    def value(self, d) -> float:
        ...

    @abstractmethod
    def gradient(self, d) -> np.ndarray:
        ...

    @property
    @abstractmethod
    def grad_bound(self) -> float:
        ...

    def conjugate_gradient(self, lam: np.ndarray) -> np.ndarray:
        """grad f*(lam), the d that maximizes lam . d - f(d)."""
        raise IncompatiblePlayers(f"{self.name} has no conjugate gradient; use the ftl cost player")

    def __call__(self, d) -> float:
        return self.value(d)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(size={self.size})"
