"""Variable-selection engines: LASSO path, coordinate descent, forward stepwise."""

from .coordinate import coord_descent, soft_threshold
from .lars import LassoPath, lars_path
from .problem import (
    KktCertificate,
    LassoProblem,
    gradient,
    intercept,
    kkt_check,
    mu_max,
    ols_refit,
)
from .stepwise import StepwisePath, forward_stepwise

__all__ = [
    "KktCertificate",
    "LassoPath",
    "LassoProblem",
    "StepwisePath",
    "coord_descent",
    "forward_stepwise",
    "gradient",
    "intercept",
    "kkt_check",
    "lars_path",
    "mu_max",
    "ols_refit",
    "soft_threshold",
]
