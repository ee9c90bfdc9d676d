from .cost import (
    CostVector,
    CostPlayerState,
    CostPlayer,
    FtlCostPlayer,
    OmdCostPlayer,
    project_box,
    project_simplex,
    project_l1_ball,
    ftl_step,
    omd_step,
    default_lr_c,
    comparator_regret,
    cost_player_regret,
)
from .policy import (
    ValueFunction,
    BestResponse,
    greedy,
    value_iteration,
    relative_value_iteration,
    best_response,
    optimal_reward,
)
from .learning import (
    ConfidenceSet,
    QLearningResult,
    GreedyWatch,
    Ucrl2State,
    tolerance,
    q_learning_best_response,
    optimistic_transition,
    extended_value_iteration,
    ucrl2_step,
    policy_player_regret,
)
from .policy_players import (
    PolicyResponse,
    PolicyPlayer,
    BestResponsePlayer,
    QLearningPlayer,
    Ucrl2Player,
)

__all__ = [
    "CostVector",
    "CostPlayerState",
    "CostPlayer",
    "FtlCostPlayer",
    "OmdCostPlayer",
    "project_box",
    "project_simplex",
    "project_l1_ball",
    "ftl_step",
    "omd_step",
    "default_lr_c",
    "comparator_regret",
    "cost_player_regret",
    "ValueFunction",
    "BestResponse",
    "greedy",
    "value_iteration",
    "relative_value_iteration",
    "best_response",
    "optimal_reward",
    "ConfidenceSet",
    "QLearningResult",
    "Ucrl2State",
    "tolerance",
    "q_learning_best_response",
    "GreedyWatch",
    "optimistic_transition",
    "extended_value_iteration",
    "ucrl2_step",
    "policy_player_regret",
    "PolicyResponse",
    "PolicyPlayer",
    "BestResponsePlayer",
    "QLearningPlayer",
    "Ucrl2Player",
]
