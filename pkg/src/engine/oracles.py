"""Reference optima on the occupancy polytope by convex duality.

Entropy-regularized problems over {d >= 0 : A d = b} have a smooth,
unconstrained dual over the flow multipliers nu:

    F(nu) = sum exp(A^T nu + c - 1) - nu . b,    d(nu) = exp(A^T nu + c - 1)

with gradient A d(nu) - b and Hessian A diag(d(nu)) A^T. c = 0 gives the
maximum-entropy occupancy, c = r / tau the occupancy maximizing
r . d + tau H(d). -F(nu) is a lower bound on min sum d log d at every nu,
so gaps measured against it never go negative.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize
from scipy.special import xlogy

from src.errors import InfeasibleSuspected
from src.mdp import TabularMdp
from src.models.enums import MdpMode
from src.players import best_response

logger = logging.getLogger(__name__)

DUAL_GTOL = 1e-11
DUAL_MAXITER = 500
EXP_CAP = 700.0
TAU_MIN = 1e-3
TAU_MAX = 1e6


@dataclass
class DualSolution:
    """Occupancy recovered from the dual, with the dual bound it certifies."""
    d: np.ndarray
    nu: np.ndarray
    dual_value: float
    flow_error: float
    converged: bool
    iterations: int

    @property
    def entropy(self) -> float:
        return float(-xlogy(self.d, self.d).sum())


@dataclass
class ConstrainedReference:
    """max r . d subject to H(d) >= min_entropy, solved through its multiplier."""
    reward: float
    entropy: float
    tau: float
    d: np.ndarray
    active: bool


def flow_system(mdp: TabularMdp):
    """(A, b) with the occupancy polytope = {d >= 0 : A d = b}.

    Discounted rows are sum_a d(s', a) - gamma sum P(s'|s, a) d(s, a) =
    (1 - gamma) d_0(s'). Average mode drops one (redundant) flow row and adds
    the mass row sum d = 1.
    """
    S, A_n = mdp.num_states, mdp.num_actions
    outflow = np.repeat(np.eye(S), A_n, axis=1)
    inflow = mdp.transition.reshape(S * A_n, S).T
    if mdp.mode == MdpMode.DISCOUNTED:
        return outflow - mdp.discount * inflow, (1.0 - mdp.discount) * mdp.initial_dist
    rows = np.vstack([(outflow - inflow)[:-1], np.ones(S * A_n)])
    b = np.zeros(S)
    b[-1] = 1.0
    return rows, b


def solve_entropy_dual(
    mdp: TabularMdp,
    offset: Optional[np.ndarray] = None,
    nu0: Optional[np.ndarray] = None,
) -> DualSolution:
    """Minimize F(nu) by trust-region Newton with the exact Hessian.

    offset is c above. It is shifted to max 0, which only moves nu, so
    dual_value is the entropy bound only when offset is None.
    """
    A, b = flow_system(mdp)
    c = np.zeros(A.shape[1]) if offset is None else np.asarray(offset, dtype=float).reshape(-1)
    c = c - c.max()

    def occupancy(nu):
        return np.exp(np.minimum(A.T @ nu + c - 1.0, EXP_CAP))

    def fun(nu):
        d = occupancy(nu)
        return float(d.sum() - nu @ b), A @ d - b

    def hess(nu):
        d = occupancy(nu)
        return (A * d) @ A.T

    x0 = np.zeros(A.shape[0]) if nu0 is None else nu0
    result = minimize(fun, x0, jac=True, hess=hess, method="trust-exact", options={"gtol": DUAL_GTOL, "maxiter": DUAL_MAXITER})
    d = occupancy(result.x)
    flow_error = float(np.abs(A @ d - b).max())
    if not result.success:
        logger.warning(f"Entropy dual on {mdp.name} stopped early: {result.message} (flow error {flow_error:.2e})")
    return DualSolution(
        d=d,
        nu=result.x,
        dual_value=float(result.x @ b - d.sum()),
        flow_error=flow_error,
        converged=bool(result.success),
        iterations=int(result.nit),
    )


def max_entropy_occupancy(mdp: TabularMdp) -> DualSolution:
    """Maximum-entropy occupancy; dual_value lower-bounds min sum d log d."""
    solution = solve_entropy_dual(mdp)
    logger.debug(f"Max entropy of {mdp.name}: {-solution.dual_value:.10f} nats in {solution.iterations} steps")
    return solution


def entropy_regularized_occupancy(
    mdp: TabularMdp, reward: np.ndarray, tau: float, nu0: Optional[np.ndarray] = None
) -> DualSolution:
    """argmax r . d + tau H(d) over the polytope, tau > 0."""
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return solve_entropy_dual(mdp, np.asarray(reward, dtype=float) / tau, nu0)


def entropy_constrained_reference(
    mdp: TabularMdp, reward: np.ndarray, min_entropy: float, xtol: float = 1e-10
) -> ConstrainedReference:
    """Best extrinsic reward among occupancies with entropy >= min_entropy.

    H(d_tau) of the regularized solution grows with tau; the root of
    H(d_tau) = min_entropy is found by Brent's method on log tau. When the
    reward-optimal occupancy already meets the floor the constraint is
    inactive and that occupancy is returned.

    Raises:
        InfeasibleSuspected: min_entropy exceeds the maximum entropy
    """
    reward = np.asarray(reward, dtype=float).reshape(-1)
    h_max = -max_entropy_occupancy(mdp).dual_value
    if min_entropy > h_max:
        raise InfeasibleSuspected(f"Entropy floor {min_entropy:.4f} exceeds the maximum {h_max:.4f} nats")

    plain = best_response(mdp, -reward, 1e-10).d
    plain_entropy = float(-xlogy(plain, plain).sum())
    if plain_entropy >= min_entropy:
        return ConstrainedReference(float(reward @ plain), plain_entropy, 0.0, plain, active=False)

    def excess(log_tau: float) -> float:
        return entropy_regularized_occupancy(mdp, reward, math.exp(log_tau)).entropy - min_entropy

    step = math.log(4.0)
    log_tau = 0.0
    if excess(log_tau) < 0.0:
        while excess(log_tau) < 0.0:
            log_tau += step
            if log_tau > math.log(TAU_MAX):
                raise InfeasibleSuspected(f"No multiplier up to {TAU_MAX} reaches entropy {min_entropy:.4f}")
        bracket = (log_tau - step, log_tau)
    else:
        while excess(log_tau) >= 0.0 and log_tau > math.log(TAU_MIN):
            log_tau -= step
        bracket = (log_tau, log_tau + step)

    if excess(bracket[0]) >= 0.0:
        tau = math.exp(bracket[0])
        logger.warning(f"Entropy floor binds below tau={tau:.1e}; reference is within {tau * h_max:.1e}")
    else:
        tau = math.exp(brentq(excess, *bracket, xtol=xtol))
    solution = entropy_regularized_occupancy(mdp, reward, tau)
    logger.info(
        f"Entropy-constrained reference on {mdp.name}: reward={float(reward @ solution.d):.6f} "
        f"H={solution.entropy:.6f} tau={tau:.4g}"
    )
    return ConstrainedReference(float(reward @ solution.d), solution.entropy, tau, solution.d, active=True)
