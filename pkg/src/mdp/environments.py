"""Built-in environment generators and their JSON documents."""

import logging
from typing import Any, Dict, Optional

import numpy as np

from src.errors import InvalidMdpError
from src.models.enums import EnvironmentType, MdpMode

from .tabular import TabularMdp

logger = logging.getLogger(__name__)

# (dx, dy) for N, E, S, W
GRID_MOVES = ((0, -1), (1, 0), (0, 1), (-1, 0))
ACTION_NAMES = ("north", "east", "south", "west")

DEEP_SEA_LEFT = 0
DEEP_SEA_RIGHT = 1


def make_gridworld(
    width: int,
    height: int,
    slip_prob: float = 0.0,
    mode: MdpMode = MdpMode.DISCOUNTED,
    discount: float = 0.9,
    start: int = 0,
) -> TabularMdp:
    """Cardinal-move gridworld, state = y * width + x.

    The intended move succeeds with probability 1 - slip_prob; otherwise one of
    the other three directions is taken uniformly. Off-grid moves stay put.
    """
    if width < 1 or height < 1:
        raise InvalidMdpError(f"Grid must be at least 1x1, got {width}x{height}")
    if not 0.0 <= slip_prob < 1.0:
        raise InvalidMdpError(f"slip_prob must lie in [0, 1), got {slip_prob}")

    S = width * height
    P = np.zeros((S, 4, S))
    for y in range(height):
        for x in range(width):
            s = y * width + x
            for a in range(4):
                for b, (dx, dy) in enumerate(GRID_MOVES):
                    prob = 1.0 - slip_prob if a == b else slip_prob / 3.0
                    if prob == 0.0:
                        continue
                    nx, ny = x + dx, y + dy
                    if not (0 <= nx < width and 0 <= ny < height):
                        nx, ny = x, y
                    P[s, a, ny * width + nx] += prob

    d0 = np.zeros(S)
    d0[start] = 1.0
    return TabularMdp(
        transition=P,
        mode=mode,
        initial_dist=d0,
        discount=discount if mode == MdpMode.DISCOUNTED else None,
        name=EnvironmentType.GRIDWORLD.value,
        params={"width": width, "height": height, "slip_prob": slip_prob, "start": start},
    )


def deep_sea_index(row: int, col: int) -> int:
    return row * (row + 1) // 2 + col


def make_deep_sea(
    depth: int,
    mode: MdpMode = MdpMode.AVERAGE,
    discount: float = 0.99,
    move_cost: Optional[float] = None,
) -> TabularMdp:
    """Triangular Deep Sea of the given depth.

    States are cells (row, col) with col <= row. "right" moves to
    (row + 1, col + 1), "left" to (row + 1, max(col - 1, 0)); every action in the
    last row returns to (0, 0). Only going right at every step reaches the
    rewarded corner. The extrinsic reward pays 1 for "right" in the corner and
    charges 0.01 / depth for every other "right".
    """
    if depth < 2:
        raise InvalidMdpError(f"Deep Sea depth must be >= 2, got {depth}")
    move_cost = 0.01 / depth if move_cost is None else move_cost

    S = depth * (depth + 1) // 2
    P = np.zeros((S, 2, S))
    reward = np.zeros((S, 2))
    for row in range(depth):
        for col in range(row + 1):
            s = deep_sea_index(row, col)
            if row == depth - 1:
                P[s, :, 0] = 1.0
            else:
                P[s, DEEP_SEA_RIGHT, deep_sea_index(row + 1, col + 1)] = 1.0
                P[s, DEEP_SEA_LEFT, deep_sea_index(row + 1, max(col - 1, 0))] = 1.0
            reward[s, DEEP_SEA_RIGHT] = -move_cost
    reward[deep_sea_index(depth - 1, depth - 1), DEEP_SEA_RIGHT] = 1.0

    d0 = np.zeros(S)
    d0[0] = 1.0
    return TabularMdp(
        transition=P,
        mode=mode,
        initial_dist=d0,
        discount=discount if mode == MdpMode.DISCOUNTED else None,
        reward=reward.reshape(-1),
        name=EnvironmentType.DEEP_SEA.value,
        params={"depth": depth, "move_cost": move_cost},
    )


def make_random_mdp(
    num_states: int,
    num_actions: int,
    branching: int,
    seed: int,
    mode: MdpMode = MdpMode.AVERAGE,
    discount: float = 0.9,
) -> TabularMdp:
    """Garnet-style random MDP.

    Each (s, a) row has `branching` successors chosen without replacement and
    Dirichlet(1) weights. Deterministic in seed.
    """
    if not 1 <= branching <= num_states:
        raise InvalidMdpError(f"branching must lie in [1, {num_states}], got {branching}")
    rng = np.random.default_rng(seed)
    P = np.zeros((num_states, num_actions, num_states))
    for s in range(num_states):
        for a in range(num_actions):
            successors = rng.choice(num_states, size=branching, replace=False)
            P[s, a, successors] = rng.dirichlet(np.ones(branching))
    P /= P.sum(axis=2, keepdims=True)

    return TabularMdp(
        transition=P,
        mode=mode,
        initial_dist=np.full(num_states, 1.0 / num_states),
        discount=discount if mode == MdpMode.DISCOUNTED else None,
        seed=seed,
        name=EnvironmentType.RANDOM.value,
        params={
            "num_states": num_states,
            "num_actions": num_actions,
            "branching": branching,
        },
    )


def make_symmetric_pair(
    mode: MdpMode = MdpMode.DISCOUNTED, discount: float = 0.9
) -> TabularMdp:
    """Two states, actions 0 = stay and 1 = switch, d_0 = (1/2, 1/2)."""
    P = np.zeros((2, 2, 2))
    for s in range(2):
        P[s, 0, s] = 1.0
        P[s, 1, 1 - s] = 1.0
    return TabularMdp(
        transition=P,
        mode=mode,
        initial_dist=np.array([0.5, 0.5]),
        discount=discount if mode == MdpMode.DISCOUNTED else None,
        name=EnvironmentType.SYMMETRIC_PAIR.value,
        params={},
    )


def make_skill_product(mdp: TabularMdp, prior: np.ndarray) -> TabularMdp:
    """Block-diagonal product of |Z| copies of mdp, one per skill.

    Product state z * S + s starts with probability p(z) d_0(s); the skill never
    changes, so one policy over the product answers every skill at once.
    """
    if mdp.mode != MdpMode.DISCOUNTED:
        raise InvalidMdpError("Skill product requires a discounted MDP")
    prior = np.asarray(prior, dtype=float)
    Z, S, A = prior.size, mdp.num_states, mdp.num_actions
    P = np.zeros((Z * S, A, Z * S))
    for z in range(Z):
        block = slice(z * S, (z + 1) * S)
        P[block, :, block] = mdp.transition
    return TabularMdp(
        transition=P,
        mode=MdpMode.DISCOUNTED,
        initial_dist=np.kron(prior, mdp.initial_dist),
        discount=mdp.discount,
        name="skill_product",
        params={"base": mdp.name, "num_skills": Z},
    )


# --- JSON documents ---


def _dense(array: np.ndarray) -> Dict[str, Any]:
    return {"shape": list(array.shape), "data": array.reshape(-1).tolist()}


def _from_dense(block: Dict[str, Any]) -> np.ndarray:
    return np.asarray(block["data"], dtype=float).reshape(block["shape"])


def environment_to_document(mdp: TabularMdp) -> Dict[str, Any]:
    """Serialize an MDP; dense arrays are row-major with explicit shapes."""
    doc: Dict[str, Any] = {
        "type": EnvironmentType.TABULAR.value,
        "generator": mdp.name,
        "params": dict(mdp.params),
        "mode": mdp.mode.value,
        "discount": mdp.discount,
        "seed": mdp.seed,
        "num_states": mdp.num_states,
        "num_actions": mdp.num_actions,
        "transition": _dense(mdp.transition),
    }
    if mdp.initial_dist is not None:
        doc["initial_dist"] = _dense(mdp.initial_dist)
    if mdp.reward is not None:
        doc["reward"] = _dense(mdp.reward)
    return doc


def environment_from_document(doc: Dict[str, Any]) -> TabularMdp:
    """Build an MDP from a generator spec or an explicit tabular document."""
    kind = EnvironmentType(doc["type"])
    mode = MdpMode(doc.get("mode", MdpMode.DISCOUNTED.value))
    discount = doc.get("discount")
    gamma = 0.9 if discount is None else discount

    if kind == EnvironmentType.GRIDWORLD:
        return make_gridworld(
            doc["width"], doc["height"], doc.get("slip_prob", 0.0), mode, gamma,
            doc.get("start", 0),
        )
    if kind == EnvironmentType.DEEP_SEA:
        return make_deep_sea(
            doc["depth"], mode, 0.99 if discount is None else discount, doc.get("move_cost"),
        )
    if kind == EnvironmentType.RANDOM:
        return make_random_mdp(
            doc["num_states"], doc["num_actions"], doc["branching"], doc.get("seed", 0),
            mode, gamma,
        )
    if kind == EnvironmentType.SYMMETRIC_PAIR:
        return make_symmetric_pair(mode, gamma)

    transition = _from_dense(doc["transition"])
    if transition.shape != (doc["num_states"], doc["num_actions"], doc["num_states"]):
        raise InvalidMdpError(f"Transition shape {transition.shape} does not match header")
    return TabularMdp(
        transition=transition,
        mode=mode,
        initial_dist=_from_dense(doc["initial_dist"]) if "initial_dist" in doc else None,
        discount=discount,
        seed=doc.get("seed"),
        reward=_from_dense(doc["reward"]) if "reward" in doc else None,
        name=doc.get("generator", EnvironmentType.TABULAR.value),
        params=doc.get("params", {}),
    )
