from .enums import (
    MdpMode,
    EnvironmentType,
    ObjectiveType,
    CostPlayerType,
    Bregman,
    PolicyPlayerType,
    ToleranceSchedule,
    GradientCorrection,
    ConstraintKind,
    StepRule,
    SuiteTag,
    Solver,
)
from .config import (
    EnvironmentSpec,
    ExpertSpec,
    ObjectiveSpec,
    CostPlayerSpec,
    PolicyPlayerSpec,
    ConstraintModel,
    ExperimentConfig,
    SeedSummary,
)

__all__ = [
    "MdpMode",
    "EnvironmentType",
    "ObjectiveType",
    "CostPlayerType",
    "Bregman",
    "PolicyPlayerType",
    "ToleranceSchedule",
    "GradientCorrection",
    "ConstraintKind",
    "StepRule",
    "SuiteTag",
    "Solver",
    "EnvironmentSpec",
    "ExpertSpec",
    "ObjectiveSpec",
    "CostPlayerSpec",
    "PolicyPlayerSpec",
    "ConstraintModel",
    "ExperimentConfig",
    "SeedSummary",
]
