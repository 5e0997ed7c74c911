"""Exception types raised by the verification routines."""


class VerificationError(Exception):
    """Base class for all errors raised by this package."""


class SingularPoint(VerificationError, ValueError):
    """A closed-form expression was evaluated on its singular set."""


class DegenerateFit(VerificationError, ValueError):
    """Too few data points to fit a log-log slope."""


class BoundaryNode(VerificationError, IndexError):
    """A stencil was requested at a node on the boundary of its grid."""


class StepFailure(VerificationError, RuntimeError):
    """The adaptive integrator could not advance."""


class NotDiagonallyDominant(VerificationError, ValueError):
    """The ring operator is too far from the identity to invert safely."""


class InvalidGrid(VerificationError, ValueError):
    """Grid parameters violate the discretization constraints."""


class FactorizationSingular(VerificationError, RuntimeError):
    """The shifted operator is numerically singular."""


class SingularTruncation(VerificationError, RuntimeError):
    """The truncated Dirichlet problem is singular even after perturbing R."""
