"""Error types raised by the convex-MDP solver.

All errors subclass ValueError so callers that only catch ValueError keep working.
"""

from typing import Any, Optional


class ConvexMdpError(ValueError):
    """Base class for solver errors."""


class InvalidMdpError(ConvexMdpError):
    """Transition kernel, initial distribution or shape is not a valid MDP."""


class InvalidPolicyError(ConvexMdpError):
    """Policy rows are not probability vectors over the MDP's actions."""


class DimensionMismatch(ConvexMdpError):
    """A vector does not have the S*A (or S) length the MDP requires."""


class AverageModeNotUnichain(ConvexMdpError):
    """The induced chain has more than one recurrent class."""

    def __init__(self, num_recurrent: int):
        self.num_recurrent = num_recurrent
        super().__init__(
            f"Induced chain has {num_recurrent} recurrent classes; "
            "average occupancy is not unique"
        )


class ExpertSupportViolation(ConvexMdpError):
    """The expert occupancy has zero entries, so KL(d || d_E) is unbounded."""


class ZeroMixtureState(ConvexMdpError):
    """The skill mixture marginal vanishes at a state some skill visits."""


class BregmanDomainError(ConvexMdpError):
    """The Bregman divergence does not match the cost player's constraint set."""


class IterationBudgetZero(ConvexMdpError):
    """A game was asked to run zero iterations."""


class IncompatiblePlayers(ConvexMdpError):
    """The configured players cannot play the requested objective or mode."""


class UnsupportedConstraint(ConvexMdpError):
    """A constraint has no registered closed-form conjugate."""


class InfeasibleSuspected(ConvexMdpError):
    """All multipliers are pinned at their bound while the constraints stay violated."""

    def __init__(self, message: str, trace: Optional[Any] = None):
        self.trace = trace
        super().__init__(message)


class InsufficientPoints(ConvexMdpError):
    """A rate fit needs at least five distinct K values."""
