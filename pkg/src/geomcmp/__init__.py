"""Distance-to-boundary comparison bounds and their numerical verification."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BracketFailure,
    DomainError,
    FocalPointInRange,
    GridTooCoarse,
    HypothesisViolated,
    InfimumNotAttained,
    NonSymmetricField,
    QuadratureUnresolved,
    StepTooCoarse,
)
from .modelfn import arccot, cs, ct, period, sn  # noqa: E402

__all__ = [
    "__version__",
    "sn", "cs", "ct", "arccot", "period",
    "DomainError", "InfimumNotAttained", "HypothesisViolated", "FocalPointInRange",
    "NonSymmetricField", "StepTooCoarse", "QuadratureUnresolved", "GridTooCoarse",
    "BracketFailure",
]
