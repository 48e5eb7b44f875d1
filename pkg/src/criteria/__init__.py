"""Certificates for the mixing conditions and the birth-death series test."""

from .certificate import (
    CertificationConfig,
    CriteriaCertificate,
    RatioScan,
    c2_alpha_lower_bound,
    c2_dirac_profile,
    c2_of_mu,
    certify,
    certify_a1,
    certify_a2,
    choose_t_max,
    conditioned_kernel,
    explicit_bound,
    gamma_from_constants,
    infimum_measure,
)
from .mixing import (
    ConvergenceFit,
    TvCurve,
    bound_curve,
    conditioned_flow,
    fit_convergence_rate,
    lipschitz_slack,
    master_bound_slack,
    mixing_integral,
    tv_to_qsd_curve,
)
from .series import SeriesReport, come_down_time, log_alpha, s_series

__all__ = [
    "CertificationConfig",
    "ConvergenceFit",
    "CriteriaCertificate",
    "RatioScan",
    "SeriesReport",
    "TvCurve",
    "bound_curve",
    "c2_alpha_lower_bound",
    "c2_dirac_profile",
    "c2_of_mu",
    "certify",
    "certify_a1",
    "certify_a2",
    "choose_t_max",
    "come_down_time",
    "conditioned_flow",
    "conditioned_kernel",
    "explicit_bound",
    "fit_convergence_rate",
    "gamma_from_constants",
    "infimum_measure",
    "lipschitz_slack",
    "log_alpha",
    "master_bound_slack",
    "mixing_integral",
    "s_series",
    "tv_to_qsd_curve",
]
