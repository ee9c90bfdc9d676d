from .game import (
    GameOptions,
    IterationRecord,
    GameTrace,
    TraceRecorder,
    is_checkpoint,
    lagrangian_value,
    duality_gap,
    run_game,
)
from .frank_wolfe import (
    fw_step_size,
    minimize_over_hull,
    run_frank_wolfe,
    run_fully_corrective_fw,
)
from .constrained import (
    Constraint,
    LinearConstraint,
    EntropyConstraint,
    CONSTRAINT_REGISTRY,
    ConstraintSpec,
    ConstrainedOptions,
    linear_constraint,
    entropy_constraint,
    make_constraint,
    run_constrained_game,
)
from .oracles import (
    DualSolution,
    ConstrainedReference,
    flow_system,
    solve_entropy_dual,
    max_entropy_occupancy,
    entropy_regularized_occupancy,
    entropy_constrained_reference,
)
from .factory import (
    build_environment,
    build_expert,
    build_objective,
    build_cost_player,
    seeded_cold_start,
    build_policy_player,
    build_constraints,
    max_entropy,
    solve,
)

__all__ = [
    "GameOptions",
    "IterationRecord",
    "GameTrace",
    "TraceRecorder",
    "is_checkpoint",
    "lagrangian_value",
    "duality_gap",
    "run_game",
    "fw_step_size",
    "minimize_over_hull",
    "run_frank_wolfe",
    "run_fully_corrective_fw",
    "Constraint",
    "LinearConstraint",
    "EntropyConstraint",
    "CONSTRAINT_REGISTRY",
    "ConstraintSpec",
    "ConstrainedOptions",
    "linear_constraint",
    "entropy_constraint",
    "make_constraint",
    "run_constrained_game",
    "DualSolution",
    "ConstrainedReference",
    "flow_system",
    "solve_entropy_dual",
    "max_entropy_occupancy",
    "entropy_regularized_occupancy",
    "entropy_constrained_reference",
    "build_environment",
    "build_expert",
    "build_objective",
    "build_cost_player",
    "seeded_cold_start",
    "build_policy_player",
    "build_constraints",
    "max_entropy",
    "solve",
]
