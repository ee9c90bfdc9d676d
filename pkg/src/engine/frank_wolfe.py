"""Frank-Wolfe over the occupancy polytope, plain and fully corrective.

The linear minimization oracle is the exact best response, so plain FW with
step 1 / (k + 1) walks exactly the same path as FTL against best response.
"""

import logging
from typing import Optional

import numpy as np

from src.mdp import TabularMdp
from src.models.enums import StepRule
from src.objectives import ConvexObjective
from src.players import PolicyResponse, best_response, project_box, project_simplex

from .game import GameOptions, GameTrace, TraceRecorder

logger = logging.getLogger(__name__)


def fw_step_size(k: int, step_rule: StepRule) -> float:
    """alpha for the k-th update (k = 0, 1, ...)."""
    if StepRule(step_rule) == StepRule.AVG:
        return 1.0 / (k + 1)
    return 2.0 / (k + 2)


def _fw_direction(mdp, objective, point, tol):
    bound = objective.grad_bound
    lam = project_box(objective.gradient(point), bound)
    normalized = lam / bound
    response = best_response(mdp, normalized, tol)
    return lam, normalized, PolicyResponse(response.policy, response.occupancy)


def run_frank_wolfe(
    mdp: TabularMdp,
    objective: ConvexObjective,
    K: int,
    step_rule: StepRule = StepRule.STANDARD,
    tol: float = 1e-8,
    options: Optional[GameOptions] = None,
) -> GameTrace:
    """Frank-Wolfe from the uniform vector.

    Each step takes the vertex minimizing grad f(d_bar) . d and moves
    d_bar <- (1 - alpha) d_bar + alpha d.
    """
    recorder = TraceRecorder("frank_wolfe", mdp, objective, K, options, oracle_for_policy=False)
    d_bar = np.full(objective.size, 1.0 / objective.size)
    for k in range(K):
        lam, normalized, response = _fw_direction(mdp, objective, d_bar, tol)
        alpha = fw_step_size(k, step_rule)
        d_bar = (1.0 - alpha) * d_bar + alpha * response.d
        recorder.record(k + 1, lam, normalized, response, d_bar=d_bar)
    trace = recorder.finish()
    trace.extras["step_rule"] = StepRule(step_rule).value
    logger.info(f"Frank-Wolfe finished: K={K} f={trace.f_bar:.6g}")
    return trace


def estimate_smoothness(objective: ConvexObjective, vertices: np.ndarray, rng, samples: int = 8) -> float:
    """Lipschitz constant of w -> V^T grad f(V w) from random simplex pairs."""
    k = vertices.shape[0]
    if k == 1:
        return 0.0
    best = 0.0
    for _ in range(samples):
        w1, w2 = rng.dirichlet(np.ones(k), size=2)
        g1 = vertices @ objective.gradient(w1 @ vertices)
        g2 = vertices @ objective.gradient(w2 @ vertices)
        dist = np.linalg.norm(w1 - w2)
        if dist > 0:
            best = max(best, float(np.linalg.norm(g1 - g2) / dist))
    return best


def minimize_over_hull(
    objective: ConvexObjective,
    vertices: np.ndarray,
    w0: np.ndarray,
    inner_iters: int,
    rng,
) -> np.ndarray:
    """Projected gradient descent on the simplex of vertex weights, step 1/L.

    Returns the best weights seen (never worse than w0).
    """
    L = estimate_smoothness(objective, vertices, rng)
    phi = lambda w: objective.value(w @ vertices)
    best_w, best_f = w0, phi(w0)
    if L <= 1e-12:
        # linear along the hull: the best vertex is optimal
        values = np.array([objective.value(v) for v in vertices])
        j = int(np.argmin(values))
        if values[j] < best_f:
            best_w = np.eye(vertices.shape[0])[j]
        return best_w

    w = w0
    step = 1.0 / L
    for _ in range(inner_iters):
        grad = vertices @ objective.gradient(w @ vertices)
        w = project_simplex(w - step * grad)
        f = phi(w)
        if f < best_f:
            best_w, best_f = w, f
    return best_w


def run_fully_corrective_fw(
    mdp: TabularMdp,
    objective: ConvexObjective,
    K: int,
    inner_iters: int = 200,
    tol: float = 1e-8,
    seed: int = 0,
    options: Optional[GameOptions] = None,
) -> GameTrace:
    """Fully-corrective Frank-Wolfe.

    Keeps every vertex found so far and re-optimizes f over their convex hull
    after each new vertex. The re-optimization starts at the plain FW step
    from the previous iterate, and the result is never worse than that step
    or the previous iterate. trace.extras["fw_candidate"] holds f at the plain
    FW step for each k.
    """
    rng = np.random.default_rng(seed)
    recorder = TraceRecorder("fully_corrective_fw", mdp, objective, K, options, oracle_for_policy=False)
    point = np.full(objective.size, 1.0 / objective.size)
    vertices = np.empty((0, objective.size))
    weights = np.empty(0)
    fw_candidates = []

    for k in range(K):
        lam, normalized, response = _fw_direction(mdp, objective, point, tol)
        d = response.d
        match = np.flatnonzero(np.all(np.isclose(vertices, d, rtol=0.0, atol=1e-14), axis=1)) if len(vertices) else []
        alpha = fw_step_size(k, StepRule.STANDARD)
        if len(match):
            j = int(match[0])
            w_fw = (1.0 - alpha) * weights
            w_fw[j] += alpha
        else:
            vertices = np.vstack([vertices, d])
            w_fw = np.append((1.0 - alpha) * weights, alpha)
            weights = np.append(weights, 0.0)

        fw_value = objective.value(w_fw @ vertices)
        fw_candidates.append(fw_value)
        w_new = minimize_over_hull(objective, vertices, w_fw, inner_iters, rng)
        if k > 0 and objective.value(weights @ vertices) < objective.value(w_new @ vertices):
            w_new = weights
        weights = w_new
        point = weights @ vertices
        recorder.record(k + 1, lam, normalized, response, d_bar=point)

    trace = recorder.finish()
    trace.extras["fw_candidate"] = fw_candidates
    trace.extras["weights"] = weights.tolist()
    trace.extras["num_vertices"] = int(vertices.shape[0])
    logger.info(f"Fully-corrective FW finished: K={K} f={trace.f_bar:.6g} vertices={vertices.shape[0]}")
    return trace
