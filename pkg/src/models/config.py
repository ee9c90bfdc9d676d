from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import Dict, List, Literal, Optional, Union

from .enums import (
    Bregman,
    ConstraintKind,
    CostPlayerType,
    EnvironmentType,
    GradientCorrection,
    MdpMode,
    ObjectiveType,
    PolicyPlayerType,
    Solver,
    StepRule,
    SuiteTag,
    ToleranceSchedule,
)


# Objectives that need an expert occupancy
EXPERT_OBJECTIVES = {ObjectiveType.L2_AL, ObjectiveType.LINF_AL, ObjectiveType.KL, ObjectiveType.GAIL}


class EnvironmentSpec(BaseModel):
    """Environment document: a generator name plus its parameters, or an
    explicit tabular MDP (type "tabular", dense arrays with shape fields)."""
    model_config = ConfigDict(extra="allow")

    type: EnvironmentType
    mode: MdpMode = MdpMode.DISCOUNTED
    discount: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    # gridworld
    width: Optional[int] = Field(default=None, ge=1)
    height: Optional[int] = Field(default=None, ge=1)
    slip_prob: float = Field(default=0.0, ge=0.0, lt=1.0)
    start: int = 0
    # deep sea
    depth: Optional[int] = Field(default=None, ge=2)
    move_cost: Optional[float] = None
    # random
    num_states: Optional[int] = Field(default=None, ge=1)
    num_actions: Optional[int] = Field(default=None, ge=1)
    branching: Optional[int] = Field(default=None, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def check_parameters(self):
        required = {
            EnvironmentType.GRIDWORLD: ("width", "height"),
            EnvironmentType.DEEP_SEA: ("depth",),
            EnvironmentType.RANDOM: ("num_states", "num_actions", "branching"),
            EnvironmentType.TABULAR: ("num_states", "num_actions"),
        }.get(self.type, ())
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.type.value} environment needs {', '.join(missing)}")
        if self.type == EnvironmentType.RANDOM and self.branching > self.num_states:
            raise ValueError("branching must not exceed num_states")
        return self


class ExpertSpec(BaseModel):
    """How to build an expert occupancy d_E."""
    name: str
    source: Literal["random_policy", "reward_optimal", "explicit"] = "random_policy"
    seed: int = 0
    policy: Optional[List[List[float]]] = None
    smoothing: Optional[float] = Field(default=None, ge=0.0, lt=1.0)

    @model_validator(mode="after")
    def check_policy(self):
        if self.source == "explicit" and self.policy is None:
            raise ValueError("explicit expert needs a policy")
        return self


class ObjectiveSpec(BaseModel):
    objective: ObjectiveType
    expert_policy_ref: Optional[str] = None
    # linear
    lam0: Optional[List[float]] = None
    use_env_reward: bool = False
    # kl
    smoothing: float = Field(default=1e-6, ge=0.0, lt=1.0)
    # diayn
    num_skills: int = Field(default=8, ge=1)
    prior: Literal["uniform", "random"] = "uniform"
    prior_seed: Optional[int] = None
    correction: GradientCorrection = GradientCorrection.FULL
    negate: bool = True

    @model_validator(mode="after")
    def check_parameters(self):
        if self.objective == ObjectiveType.LINEAR and self.lam0 is None and not self.use_env_reward:
            raise ValueError("linear objective needs lam0 or use_env_reward")
        if self.objective in EXPERT_OBJECTIVES and self.expert_policy_ref is None:
            raise ValueError(f"{self.objective.value} objective needs expert_policy_ref")
        return self


class CostPlayerSpec(BaseModel):
    cost_player: CostPlayerType = CostPlayerType.FTL
    lr_c: Optional[float] = Field(default=None, gt=0.0)
    lr_exp: float = Field(default=0.5, gt=0.0)
    bregman: Optional[Bregman] = None

    @model_validator(mode="after")
    def check_bregman(self):
        implied = {CostPlayerType.OGD: Bregman.L2, CostPlayerType.MW: Bregman.ENTROPY}.get(self.cost_player)
        if self.bregman is not None and implied is not None and self.bregman != implied:
            raise ValueError(f"{self.cost_player.value} uses the {implied.value} Bregman divergence")
        if self.bregman is None:
            self.bregman = implied
        return self


class PolicyPlayerSpec(BaseModel):
    policy_player: PolicyPlayerType = PolicyPlayerType.BEST_RESPONSE
    tol_schedule: ToleranceSchedule = ToleranceSchedule.CONST
    tol_c: float = Field(default=1e-8, gt=0.0)
    delta: float = Field(default=0.05, gt=0.0, lt=1.0)
    evi_budget: Union[Literal["k"], int] = "k"
    c_p: float = Field(default=14.0, ge=0.0)
    q_budget: int = Field(default=100, ge=1)
    q_budget_cap: int = Field(default=100_000, ge=1)


class ConstraintModel(BaseModel):
    kind: ConstraintKind
    # linear: lam2 . d <= c
    lam2: Optional[List[float]] = None
    use_env_reward: bool = False
    c: Optional[float] = None
    # entropy: H(d) >= min_entropy, or a fraction of the maximum entropy
    min_entropy: Optional[float] = None
    entropy_fraction: Optional[float] = Field(default=None, gt=0.0, le=1.0)

    @model_validator(mode="after")
    def check_parameters(self):
        if self.kind == ConstraintKind.LINEAR:
            if self.c is None or (self.lam2 is None and not self.use_env_reward):
                raise ValueError("linear constraint needs lam2 (or use_env_reward) and c")
        elif self.min_entropy is None and self.entropy_fraction is None:
            raise ValueError("entropy constraint needs min_entropy or entropy_fraction")
        return self


class ExperimentConfig(BaseModel):
    """One experiment: environment, objective, players, solver and run settings."""
    name: str = "experiment"
    environment: EnvironmentSpec
    objective: ObjectiveSpec
    cost: CostPlayerSpec = Field(default_factory=CostPlayerSpec)
    policy: PolicyPlayerSpec = Field(default_factory=PolicyPlayerSpec)
    experts: List[ExpertSpec] = Field(default_factory=list)
    solver: Solver = Solver.GAME
    step_rule: StepRule = StepRule.STANDARD
    inner_iters: int = Field(default=200, ge=1)
    constraints: List[ConstraintModel] = Field(default_factory=list)
    mu_max: float = Field(default=100.0, gt=0.0)
    mu_lr_c: float = Field(default=1.0, gt=0.0)
    K: int = Field(ge=1)
    seeds: List[int] = Field(default_factory=lambda: [0], min_length=1)
    output_dir: str = "runs"
    parallel: int = Field(default=1, ge=1)
    suite: Optional[SuiteTag] = None
    grid_size: int = Field(default=32, ge=1)
    record_wall_time: bool = False
    track_policy_regret: bool = True

    @model_validator(mode="after")
    def check_references(self):
        names = [e.name for e in self.experts]
        ref = self.objective.expert_policy_ref
        if ref is not None and ref not in names:
            raise ValueError(f"expert_policy_ref '{ref}' does not name an entry of experts {names}")

        objective = self.objective.objective
        cost = self.cost.cost_player
        if self.policy.policy_player == PolicyPlayerType.UCRL2 and self.environment.mode != MdpMode.AVERAGE:
            raise ValueError("ucrl2 policy player needs an average-mode environment")
        if objective == ObjectiveType.DIAYN:
            if self.environment.mode != MdpMode.DISCOUNTED:
                raise ValueError("diayn objective needs a discounted environment")
            if self.policy.policy_player == PolicyPlayerType.UCRL2:
                raise ValueError("diayn objective runs on a discounted product MDP; ucrl2 is not available")
        if objective == ObjectiveType.LINF_AL and cost == CostPlayerType.FTL:
            raise ValueError("linf_al has no gradient; use the ogd or mw cost player")
        if cost == CostPlayerType.MW and objective != ObjectiveType.LINF_AL:
            raise ValueError("mw cost player needs the L1-ball dual set of linf_al")
        if cost != CostPlayerType.FTL and objective in (ObjectiveType.LINEAR, ObjectiveType.DIAYN, ObjectiveType.GAIL):
            raise ValueError(f"{objective.value} has no conjugate gradient; use the ftl cost player")
        if self.solver in (Solver.FRANK_WOLFE, Solver.FULLY_CORRECTIVE_FW) and objective == ObjectiveType.LINF_AL:
            raise ValueError("Frank-Wolfe needs a smooth objective")
        if self.constraints and self.solver != Solver.CONSTRAINED:
            raise ValueError("constraints are only used by the constrained solver")
        return self


class SeedSummary(BaseModel):
    """JSON summary written next to each seed's trace CSV."""
    name: str
    seed: int
    solver: str
    objective: str
    K: int
    f_bar: float
    gap_lower: Optional[float] = None
    gap_upper: Optional[float] = None
    regret_pi: Optional[float] = None
    regret_lambda: Optional[float] = None
    residuals: List[float] = Field(default_factory=list)
    d_bar: List[float] = Field(default_factory=list)
    lambda_bar: List[float] = Field(default_factory=list)
    flags: Dict[str, Union[bool, str, float]] = Field(default_factory=dict)
    extras: Dict[str, object] = Field(default_factory=dict)
    config: Dict[str, object] = Field(default_factory=dict)
