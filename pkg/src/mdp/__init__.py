from .tabular import TabularMdp, Policy, OccupancyMeasure
from .occupancy import (
    Violation,
    induced_chain,
    count_recurrent_classes,
    stationary_distribution,
    occupancy_of_policy,
    policy_of_occupancy,
    validate_occupancy,
    enumerate_deterministic_policies,
    expected_reward,
)
from .environments import (
    make_gridworld,
    make_deep_sea,
    make_random_mdp,
    make_symmetric_pair,
    make_skill_product,
    deep_sea_index,
    environment_to_document,
    environment_from_document,
)
from .simulator import Simulator, rollout_average_reward, truncated_discounted_value

__all__ = [
    "TabularMdp",
    "Policy",
    "OccupancyMeasure",
    "Violation",
    "induced_chain",
    "count_recurrent_classes",
    "stationary_distribution",
    "occupancy_of_policy",
    "policy_of_occupancy",
    "validate_occupancy",
    "enumerate_deterministic_policies",
    "expected_reward",
    "make_gridworld",
    "make_deep_sea",
    "make_random_mdp",
    "make_symmetric_pair",
    "make_skill_product",
    "deep_sea_index",
    "environment_to_document",
    "environment_from_document",
    "Simulator",
    "rollout_average_reward",
    "truncated_discounted_value",
]
