"""Skill-discovery objective: prior-weighted KL of each skill to the skill mixture.

Per-skill quantities live on state marginals d^z(s). The game itself runs on
the skill product MDP (see make_skill_product), whose joint occupancy is
x(z, s, a) with sum_a x(z, s, a) = p(z) d^z(s).
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import rel_entr, xlogy

from src.errors import DimensionMismatch, ZeroMixtureState
from src.models.enums import GradientCorrection

from .base import LOG_FLOOR, ConvexObjective

PRIOR_TOL = 1e-9


@dataclass(frozen=True)
class SkillSet:
    """Skill prior p(z) and per-skill state marginals d^z, shape (Z, S)."""
    prior: np.ndarray
    occupancies: np.ndarray

    def __post_init__(self):
        prior = np.asarray(self.prior, dtype=float)
        occ = np.asarray(self.occupancies, dtype=float)
        if occ.ndim != 2 or occ.shape[0] != prior.size:
            raise DimensionMismatch(f"Need one state marginal per skill, got {occ.shape}")
        if np.any(prior < 0) or abs(prior.sum() - 1.0) > PRIOR_TOL:
            raise ValueError("Skill prior must be a probability vector")
        if np.any(occ < -PRIOR_TOL) or np.abs(occ.sum(axis=1) - 1.0).max() > 1e-8:
            raise ValueError("Each skill marginal must be a probability vector")
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "occupancies", np.clip(occ, 0.0, None))

    @property
    def num_skills(self) -> int:
        return self.prior.size

    @property
    def num_states(self) -> int:
        return self.occupancies.shape[1]

    def mixture(self) -> np.ndarray:
        """sum_k p(k) d^k(s)."""
        return self.prior @ self.occupancies

    def posterior(self) -> np.ndarray:
        """p(z | s), shape (Z, S); equals the prior where no skill goes.

        Raises:
            ZeroMixtureState: a skill visits a state the mixture does not
        """
        joint = self.prior[:, None] * self.occupancies
        mix = joint.sum(axis=0)
        dead = (mix <= LOG_FLOOR) & np.any(self.occupancies > LOG_FLOOR, axis=0)
        if np.any(dead):
            raise ZeroMixtureState(
                f"Mixture marginal vanishes at visited states {np.flatnonzero(dead).tolist()}"
            )
        post = np.broadcast_to(self.prior[:, None], joint.shape).copy()
        seen = mix > LOG_FLOOR
        post[:, seen] = joint[:, seen] / mix[seen]
        return post

    @classmethod
    def from_joint(cls, x: np.ndarray, prior: np.ndarray, num_states: int, num_actions: int) -> "SkillSet":
        """Per-skill marginals from a joint product-MDP occupancy.

        Each block is normalized by its own mass, which is p(z) on the polytope.
        """
        prior = np.asarray(prior, dtype=float)
        q = np.asarray(x, dtype=float).reshape(prior.size, num_states, num_actions).sum(axis=2)
        mass = q.sum(axis=1)
        empty = mass <= LOG_FLOOR
        occ = q / np.where(empty, 1.0, mass)[:, None]
        occ[empty] = 1.0 / num_states
        return cls(prior=prior, occupancies=occ)


def diayn_value(skills: SkillSet) -> float:
    """sum_z p(z) KL(d^z || sum_k p(k) d^k)."""
    mix = skills.mixture()
    kl = rel_entr(skills.occupancies, mix[None, :]).sum(axis=1)
    return float(skills.prior @ kl)


def diayn_value_mi_form(skills: SkillSet) -> float:
    """E_{z, s ~ d^z}[log p(z | s) - log p(z)], the mutual information I(S; Z)."""
    post = skills.posterior()
    joint = skills.prior[:, None] * skills.occupancies
    log_prior = np.log(np.where(skills.prior > 0, skills.prior, 1.0))
    return float(xlogy(joint, post).sum() - joint.sum(axis=1) @ log_prior)


def mutual_information(skills: SkillSet, bits: bool = False) -> float:
    value = diayn_value(skills)
    return value / math.log(2.0) if bits else value


def per_skill_gradient(skills: SkillSet, correction: GradientCorrection = GradientCorrection.FULL) -> np.ndarray:
    """Per-skill reward over states, shape (Z, S).

    full:     log p(z|s) - log p(z) + 1 - p(z|s)
    no_const: log p(z|s) - log p(z) - p(z|s)
    none:     log p(z|s) - log p(z)

    "full" is the gradient of KL(d^z || mixture) with respect to d^z.
    """
    correction = GradientCorrection(correction)
    post = skills.posterior()
    log_prior = np.log(np.maximum(skills.prior, LOG_FLOOR))
    grad = np.log(np.maximum(post, LOG_FLOOR)) - log_prior[:, None]
    if correction == GradientCorrection.FULL:
        grad = grad + 1.0 - post
    elif correction == GradientCorrection.NO_CONST:
        grad = grad - post
    return grad


def sample_skill_prior(num_skills: int, seed: int) -> np.ndarray:
    """Non-uniform prior p_i = u_i / sum u with u_i ~ U(0, 1)."""
    u = np.random.default_rng(seed).uniform(0.0, 1.0, size=num_skills)
    return u / u.sum()


class DiaynObjective(ConvexObjective):
    """DIAYN objective over the joint occupancy of the skill product MDP.

    The gradient hands each skill block its per-skill reward (see
    per_skill_gradient) broadcast over actions. With correction "none" this is
    the exact gradient of value(). negate=True turns the objective into skill
    discovery (maximize mutual information), which is no longer convex.
    """

    name = "diayn"

    def __init__(
        self,
        prior: np.ndarray,
        num_states: int,
        num_actions: int,
        correction: GradientCorrection = GradientCorrection.FULL,
        negate: bool = False,
    ):
        self.prior = np.asarray(prior, dtype=float)
        self.num_states = num_states
        self.num_actions = num_actions
        self.correction = GradientCorrection(correction)
        self.negate = negate
        self.sign = -1.0 if negate else 1.0
        self.is_convex = not negate
        super().__init__(self.prior.size * num_states * num_actions)

    def skills(self, x) -> SkillSet:
        return SkillSet.from_joint(self._check(x), self.prior, self.num_states, self.num_actions)

    def value(self, x) -> float:
        return self.sign * diayn_value(self.skills(x))

    def gradient(self, x) -> np.ndarray:
        grad = per_skill_gradient(self.skills(x), self.correction)
        return self.sign * np.repeat(grad.reshape(-1), self.num_actions)

    @property
    def grad_bound(self) -> float:
        return 1.0 + abs(math.log(LOG_FLOOR)) + abs(math.log(max(self.prior.min(), LOG_FLOOR)))


def diayn_objective(
    skills: SkillSet,
    num_actions: int,
    correction: GradientCorrection = GradientCorrection.FULL,
    negate: bool = False,
) -> DiaynObjective:
    return DiaynObjective(skills.prior, skills.num_states, num_actions, correction, negate)
