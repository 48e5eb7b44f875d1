"""Finite absorbed chains and their exact transition operators."""

from .generator import (
    DENSE_LIMIT,
    AbsorbedGenerator,
    DistributionVector,
    GeneratorIssue,
    SurvivalCurve,
    ValidationReport,
    validate,
)
from .semigroup import (
    condition,
    conditional_semigroup_apply,
    iter_survival_profiles,
    log_survival_probability,
    survival_probability,
    survival_profile,
    transition_matrix,
    tv_distance,
)

__all__ = [
    "AbsorbedGenerator",
    "DENSE_LIMIT",
    "DistributionVector",
    "GeneratorIssue",
    "SurvivalCurve",
    "ValidationReport",
    "condition",
    "conditional_semigroup_apply",
    "iter_survival_profiles",
    "log_survival_probability",
    "survival_probability",
    "survival_profile",
    "transition_matrix",
    "tv_distance",
    "validate",
]
