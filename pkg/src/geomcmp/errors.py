"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class InfimumNotAttained(DomainError):
    """The requested mean-curvature value is at or below the model infimum.

    For ``k <= 0`` the distance to the boundary may then be unbounded.
    """


class HypothesisViolated(DomainError):
    """A curvature or boundary hypothesis does not hold for the given input."""


class FocalPointInRange(DomainError):
    """A focal point of the boundary lies inside the requested interval."""


class NonSymmetricField(ValueError):
    """A sampled curvature matrix is not symmetric."""


class StepTooCoarse(RuntimeError):
    """Step halving changed the integrated Laplacian by more than the tolerance."""


class QuadratureUnresolved(RuntimeError):
    """Simpson refinement did not converge."""


class GridTooCoarse(RuntimeError):
    """Finite-difference grid too coarse for the requested accuracy."""


class BracketFailure(RuntimeError):
    """The eigenvalue bracket does not contain a sign change."""
