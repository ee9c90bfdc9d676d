from enum import Enum


class MdpMode(str, Enum):
    AVERAGE = "average"
    DISCOUNTED = "discounted"


class EnvironmentType(str, Enum):
    GRIDWORLD = "gridworld"
    DEEP_SEA = "deep_sea"
    RANDOM = "random"
    SYMMETRIC_PAIR = "symmetric_pair"
    TABULAR = "tabular"


class ObjectiveType(str, Enum):
    LINEAR = "linear"
    NEG_ENTROPY = "neg_entropy"
    L2_AL = "l2_al"
    LINF_AL = "linf_al"
    KL = "kl"
    DIAYN = "diayn"
    GAIL = "gail"


class CostPlayerType(str, Enum):
    FTL = "ftl"
    OGD = "ogd"
    MW = "mw"


class Bregman(str, Enum):
    L2 = "l2"
    ENTROPY = "entropy"


class PolicyPlayerType(str, Enum):
    BEST_RESPONSE = "best_response"
    Q_LEARNING = "q_learning"
    UCRL2 = "ucrl2"


class ToleranceSchedule(str, Enum):
    CONST = "const"
    INV_K = "1/k"
    INV_SQRT_K = "1/sqrt(k)"


class GradientCorrection(str, Enum):
    FULL = "full"
    NO_CONST = "no_const"
    NONE = "none"


class ConstraintKind(str, Enum):
    LINEAR = "linear"
    ENTROPY = "entropy"


class StepRule(str, Enum):
    STANDARD = "standard"
    AVG = "avg"


class SuiteTag(str, Enum):
    TABLE1_ROW = "table1_row"
    DIAYN_PRIOR_ABLATION = "diayn_prior_ablation"
    ENTROPY_CONSTRAINED_DEEPSEA = "entropy_constrained_deepsea"
    RATES = "rates"


class Solver(str, Enum):
    GAME = "game"
    FRANK_WOLFE = "frank_wolfe"
    FULLY_CORRECTIVE_FW = "fully_corrective_fw"
    CONSTRAINED = "constrained"
