"""Quasi-stationary triple, Q-process and spectrum diagnostics."""

from .qprocess import (
    QProcess,
    apply_qprocess_generator,
    generator_identity_residual,
    qprocess_generator,
    qprocess_law,
    qprocess_transition,
)
from .triple import (
    EigenvalueEntry,
    SolverConfig,
    SpectralTriple,
    SpectrumReport,
    eta_limit_profile,
    solve_spectral,
    spectrum_report,
)

__all__ = [
    "EigenvalueEntry",
    "QProcess",
    "SolverConfig",
    "SpectralTriple",
    "SpectrumReport",
    "apply_qprocess_generator",
    "eta_limit_profile",
    "generator_identity_residual",
    "qprocess_generator",
    "qprocess_law",
    "qprocess_transition",
    "solve_spectral",
    "spectrum_report",
]
