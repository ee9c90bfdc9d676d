from .base import ConvexObjective, LOG_FLOOR
from .library import (
    ExpertOccupancy,
    LinearObjective,
    NegEntropyObjective,
    L2ApprenticeshipObjective,
    KlObjective,
    LinfApprenticeshipGame,
    GailObjective,
    smooth_expert,
    linear_objective,
    neg_entropy_objective,
    l2_apprenticeship_objective,
    linf_apprenticeship_game,
    kl_objective,
    gail_objective,
)
from .diayn import (
    SkillSet,
    DiaynObjective,
    diayn_objective,
    diayn_value,
    diayn_value_mi_form,
    mutual_information,
    per_skill_gradient,
    sample_skill_prior,
)
from .conjugate import ConjugateGrid, fenchel_conjugate_check, random_occupancy_grid

__all__ = [
    "ConvexObjective",
    "LOG_FLOOR",
    "ExpertOccupancy",
    "LinearObjective",
    "NegEntropyObjective",
    "L2ApprenticeshipObjective",
    "KlObjective",
    "LinfApprenticeshipGame",
    "GailObjective",
    "smooth_expert",
    "linear_objective",
    "neg_entropy_objective",
    "l2_apprenticeship_objective",
    "linf_apprenticeship_game",
    "kl_objective",
    "gail_objective",
    "SkillSet",
    "DiaynObjective",
    "diayn_objective",
    "diayn_value",
    "diayn_value_mi_form",
    "mutual_information",
    "per_skill_gradient",
    "sample_skill_prior",
    "ConjugateGrid",
    "fenchel_conjugate_check",
    "random_occupancy_grid",
]
