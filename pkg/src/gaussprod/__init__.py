"""Mixed absolute moments of Gaussian vectors and numerical checks of product inequalities."""

from .bounds import KINDS, BoundResult, InequalityCase, evaluate
from .errors import (
    CapabilityError,
    DomainError,
    GaussProdError,
    InternalConsistencyError,
    NotPositiveDefinite,
    NumericError,
    SingularBlockError,
)
from .moments import MomentEstimate, abs_moment_1d, bivariate_abs_moment, even_moment, mixed_moment
from .specfun import gauss_2f1, gauss_2f1_at_one, log_gamma

__version__ = "0.1.0"

__all__ = [
    "KINDS", "BoundResult", "InequalityCase", "evaluate",
    "CapabilityError", "DomainError", "GaussProdError", "InternalConsistencyError",
    "NotPositiveDefinite", "NumericError", "SingularBlockError",
    "MomentEstimate", "abs_moment_1d", "bivariate_abs_moment", "even_moment", "mixed_moment",
    "gauss_2f1", "gauss_2f1_at_one", "log_gamma",
]
