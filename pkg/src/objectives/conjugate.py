"""Grid estimates of the Fenchel conjugate f*(y) = sup_{d in K} y . d - f(d)."""

from typing import Iterable, List

import numpy as np

from src.mdp import Policy, TabularMdp, occupancy_of_policy

from .base import ConvexObjective


class ConjugateGrid:
    """Finite sample of the occupancy polytope with cached objective values.

    The estimate max_g (y . g - f(g)) is a lower bound on f*(y) and can only
    grow as points are added.
    """

    def __init__(self, objective: ConvexObjective, points: Iterable[np.ndarray] = ()):
        self.objective = objective
        self._points: List[np.ndarray] = []
        self._values: List[float] = []
        self._matrix = None
        for p in points:
            self.add(p)

    def __len__(self) -> int:
        return len(self._points)

    def add(self, point) -> None:
        point = np.asarray(getattr(point, "d", point), dtype=float).reshape(-1).copy()
        self._points.append(point)
        self._values.append(self.objective.value(point))
        self._matrix = None

    def extend(self, points: Iterable[np.ndarray]) -> None:
        for p in points:
            self.add(p)

    def copy(self) -> "ConjugateGrid":
        grid = ConjugateGrid(self.objective)
        grid._points = list(self._points)
        grid._values = list(self._values)
        return grid

    @property
    def points(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.vstack(self._points)
        return self._matrix

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self._values)

    def conjugate(self, y: np.ndarray) -> float:
        if not self._points:
            raise ValueError("Conjugate grid is empty")
        return float(np.max(self.points @ y - self.values))


def fenchel_conjugate_check(objective: ConvexObjective, y: np.ndarray, grid) -> float:
    """max over grid of y . d - f(d), a lower bound on f*(y)."""
    if not isinstance(grid, ConjugateGrid):
        grid = ConjugateGrid(objective, grid)
    return grid.conjugate(np.asarray(y, dtype=float).reshape(-1))


def random_occupancy_grid(mdp: TabularMdp, num_points: int, seed: int = 0) -> List[np.ndarray]:
    """Occupancies of the uniform policy and num_points - 1 Dirichlet-random policies."""
    rng = np.random.default_rng(seed)
    points = [occupancy_of_policy(mdp, Policy.uniform(mdp.num_states, mdp.num_actions)).d]
    for _ in range(max(num_points - 1, 0)):
        probs = rng.dirichlet(np.ones(mdp.num_actions), size=mdp.num_states)
        points.append(occupancy_of_policy(mdp, Policy(probs)).d)
    return points
