"""Builds environments, objectives, players and solvers from an ExperimentConfig."""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from src.mdp import (
    Policy,
    TabularMdp,
    environment_from_document,
    make_skill_product,
    occupancy_of_policy,
)
from src.models import (
    ConstraintKind,
    CostPlayerType,
    ExperimentConfig,
    ExpertSpec,
    ObjectiveSpec,
    ObjectiveType,
    PolicyPlayerSpec,
    PolicyPlayerType,
    Solver,
)
from src.objectives import (
    ConvexObjective,
    DiaynObjective,
    GailObjective,
    KlObjective,
    L2ApprenticeshipObjective,
    LinearObjective,
    LinfApprenticeshipGame,
    NegEntropyObjective,
    sample_skill_prior,
    smooth_expert,
)
from src.players import (
    BestResponsePlayer,
    CostPlayer,
    FtlCostPlayer,
    OmdCostPlayer,
    PolicyPlayer,
    QLearningPlayer,
    Ucrl2Player,
    best_response,
)

from .constrained import (
    ConstrainedOptions,
    ConstraintSpec,
    EntropyConstraint,
    LinearConstraint,
    run_constrained_game,
)
from .frank_wolfe import run_fully_corrective_fw, run_frank_wolfe
from .game import GameOptions, GameTrace, run_game
from .oracles import max_entropy_occupancy

logger = logging.getLogger(__name__)


def build_environment(config: ExperimentConfig) -> TabularMdp:
    return environment_from_document(config.environment.model_dump(mode="json", exclude_none=True))


def build_expert(mdp: TabularMdp, spec: ExpertSpec) -> np.ndarray:
    """Expert occupancy from a seeded random policy, an explicit policy, or
    the policy optimal for the environment's extrinsic reward."""
    if spec.source == "explicit":
        policy = Policy(np.asarray(spec.policy, dtype=float))
    elif spec.source == "reward_optimal":
        if mdp.reward is None:
            raise ValueError(f"Expert '{spec.name}' needs an environment with an extrinsic reward")
        policy = best_response(mdp, -mdp.reward).policy
    else:
        rng = np.random.default_rng(spec.seed)
        policy = Policy(rng.dirichlet(np.ones(mdp.num_actions), size=mdp.num_states))
    d_E = occupancy_of_policy(mdp, policy).d
    if spec.smoothing:
        d_E = smooth_expert(d_E, spec.smoothing)
    return d_E


def skill_prior(spec: ObjectiveSpec, seed: int) -> np.ndarray:
    if spec.prior == "random":
        return sample_skill_prior(spec.num_skills, seed if spec.prior_seed is None else spec.prior_seed)
    return np.full(spec.num_skills, 1.0 / spec.num_skills)


def build_objective(
    config: ExperimentConfig, mdp: TabularMdp, seed: int = 0
) -> Tuple[ConvexObjective, TabularMdp]:
    """Objective and the MDP the game runs on (the skill product for diayn)."""
    spec = config.objective
    experts: Dict[str, ExpertSpec] = {e.name: e for e in config.experts}
    d_E = build_expert(mdp, experts[spec.expert_policy_ref]) if spec.expert_policy_ref else None
    kind = spec.objective

    if kind == ObjectiveType.LINEAR:
        lam0 = -mdp.reward if spec.use_env_reward else np.asarray(spec.lam0, dtype=float)
        return LinearObjective(lam0), mdp
    if kind == ObjectiveType.NEG_ENTROPY:
        return NegEntropyObjective(mdp.num_pairs), mdp
    if kind == ObjectiveType.L2_AL:
        return L2ApprenticeshipObjective(d_E), mdp
    if kind == ObjectiveType.LINF_AL:
        return LinfApprenticeshipGame(d_E), mdp
    if kind == ObjectiveType.KL:
        return KlObjective(smooth_expert(d_E, spec.smoothing) if spec.smoothing else d_E), mdp
    if kind == ObjectiveType.GAIL:
        return GailObjective(d_E, mdp.num_states, mdp.num_actions), mdp

    prior = skill_prior(spec, seed)
    product = make_skill_product(mdp, prior)
    objective = DiaynObjective(prior, mdp.num_states, mdp.num_actions, spec.correction, spec.negate)
    return objective, product


def seeded_cold_start(mdp: TabularMdp, seed: int) -> np.ndarray:
    """Occupancy of a seeded random deterministic policy on mdp."""
    rng = np.random.default_rng(seed)
    policy = Policy.deterministic(rng.integers(0, mdp.num_actions, size=mdp.num_states), mdp.num_actions)
    return occupancy_of_policy(mdp, policy).d


def build_cost_player(
    config: ExperimentConfig,
    objective: ConvexObjective,
    mdp: Optional[TabularMdp] = None,
    seed: int = 0,
) -> CostPlayer:
    """FTL or OMD cost player. Skill discovery under FTL starts from a seeded
    random product policy, since the uniform point gives every skill the same
    reward and mutual information never leaves 0."""
    spec = config.cost
    if spec.cost_player == CostPlayerType.FTL:
        initial_point = None
        if isinstance(objective, DiaynObjective) and objective.negate and mdp is not None:
            initial_point = seeded_cold_start(mdp, seed)
        return FtlCostPlayer(objective, initial_point)
    return OmdCostPlayer(objective, spec.bregman, spec.lr_c, spec.lr_exp)


def build_policy_player(spec: PolicyPlayerSpec, mdp: TabularMdp, seed: int = 0) -> PolicyPlayer:
    if spec.policy_player == PolicyPlayerType.BEST_RESPONSE:
        return BestResponsePlayer(mdp, spec.tol_schedule, spec.tol_c)
    if spec.policy_player == PolicyPlayerType.Q_LEARNING:
        return QLearningPlayer(
            mdp, seed, spec.tol_schedule, spec.tol_c, spec.q_budget, spec.q_budget_cap
        )
    return Ucrl2Player(mdp, seed, spec.delta, spec.evi_budget, spec.c_p)


def max_entropy(mdp: TabularMdp) -> float:
    """Largest state-action entropy over the occupancy polytope."""
    return -max_entropy_occupancy(mdp).dual_value


def build_constraints(config: ExperimentConfig, mdp: TabularMdp) -> ConstraintSpec:
    constraints = []
    h_max: Optional[float] = None
    for model in config.constraints:
        if model.kind == ConstraintKind.LINEAR:
            lam2 = -mdp.reward if model.use_env_reward else np.asarray(model.lam2, dtype=float)
            constraints.append(LinearConstraint(lam2, model.c))
            continue
        if model.min_entropy is not None:
            target = model.min_entropy
        else:
            if h_max is None:
                h_max = max_entropy(mdp)
                logger.info(f"Maximum entropy of {mdp.name}: {h_max:.4f} nats")
            target = model.entropy_fraction * h_max
        constraints.append(EntropyConstraint(mdp.num_pairs, target))
    return ConstraintSpec(constraints, config.mu_max)


def game_options(config: ExperimentConfig, seed: int) -> GameOptions:
    return GameOptions(
        grid_size=config.grid_size,
        grid_seed=seed,
        track_policy_regret=config.track_policy_regret,
        record_wall_time=config.record_wall_time,
    )


def solve(config: ExperimentConfig, seed: int) -> GameTrace:
    """Run the configured solver for one seed."""
    base = build_environment(config)
    objective, mdp = build_objective(config, base, seed)
    options = game_options(config, seed)
    logger.info(
        f"Solving {config.name} seed={seed}: solver={config.solver.value} "
        f"objective={objective.name} S={mdp.num_states} A={mdp.num_actions} K={config.K}"
    )

    if config.solver == Solver.FRANK_WOLFE:
        return run_frank_wolfe(mdp, objective, config.K, config.step_rule, config.policy.tol_c, options)
    if config.solver == Solver.FULLY_CORRECTIVE_FW:
        return run_fully_corrective_fw(
            mdp, objective, config.K, config.inner_iters, config.policy.tol_c, seed, options
        )

    policy_player = build_policy_player(config.policy, mdp, seed)
    if config.solver == Solver.CONSTRAINED:
        constraints = build_constraints(config, mdp)
        cost_player = build_cost_player(config, objective, mdp, seed) if not constraints.m else None
        dual = ConstrainedOptions(nu_lr_c=config.cost.lr_c, mu_lr_c=config.mu_lr_c, lr_exp=config.cost.lr_exp)
        return run_constrained_game(
            mdp, objective, constraints, cost_player, policy_player, config.K, options, dual
        )
    cost_player = build_cost_player(config, objective, mdp, seed)
    return run_game(mdp, objective, cost_player, policy_player, config.K, options)
