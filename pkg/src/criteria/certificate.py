"""Numerical certificates for the minorization and Harnack-type conditions.

The minorization step builds the conditioned kernel rows at ``t0`` and takes
their infimum measure.  The ratio step scans
``P_ν(t<τ_∂) / max_x P_x(t<τ_∂)`` over a time grid and closes the scan with
its ``t → ∞`` limit ``ν(η) / max η``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from ..chain.generator import AbsorbedGenerator, DistributionVector
from ..chain.semigroup import (
    SURVIVAL_FLOOR,
    Measure,
    as_weights,
    iter_survival_profiles,
    transition_matrix,
)
from ..errors import CriteriaViolation
from ..spectral.triple import SpectralTriple, eta_limit_profile

logger = logging.getLogger(__name__)

# Slack tolerated when re-checking the minorization entrywise.
MINORIZATION_SLACK = 1e-12


@dataclass(frozen=True)
class CertificationConfig:
    """Search grid and horizons used by :func:`certify`."""

    t0_factors: Tuple[float, ...] = (0.5, 1.0, 2.0, 4.0)
    grid_fraction: float = 0.25
    t_max_factor: float = 10.0
    t_max_growth: float = 2.0
    max_extensions: int = 10
    eta_precision: float = 0.01


@dataclass(frozen=True, eq=False)
class RatioScan:
    """Survival ratio of one initial law against the best Dirac start."""

    value: float
    argmin_t: float
    times: np.ndarray
    ratios: np.ndarray
    asymptote: float


@dataclass(frozen=True, eq=False)
class CriteriaCertificate:
    t0: float
    nu: DistributionVector
    c1: float
    c2: float
    c2_alpha: float
    gamma_bound: float
    C_bound: float = 2.0
    c2_argmin_t: float = math.inf
    c2_dirac: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ratio_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ratio_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        if not 0 < self.c1 <= 1 or not 0 < self.c2 <= 1:
            raise ValueError(f"constants out of range: c1={self.c1}, c2={self.c2}")
        for name in ("c2_dirac", "ratio_times", "ratio_values"):
            array = np.array(getattr(self, name), dtype=float).reshape(-1)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def contraction(self) -> float:
        """``1 - c₁c₂``, the per-``t0`` contraction factor."""

        return 1.0 - self.c1 * self.c2

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t0": self.t0,
            "nu": self.nu.weights.tolist(),
            "c1": self.c1,
            "c2": self.c2,
            "c2_alpha": self.c2_alpha,
            "gamma_bound": self.gamma_bound,
            "C_bound": self.C_bound,
            "c2_argmin_t": self.c2_argmin_t,
            "c2_dirac": self.c2_dirac.tolist(),
            "ratio_times": self.ratio_times.tolist(),
            "ratio_values": self.ratio_values.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "CriteriaCertificate":
        return cls(
            t0=float(payload["t0"]),
            nu=DistributionVector(np.array(payload["nu"], dtype=float)),
            c1=float(payload["c1"]),
            c2=float(payload["c2"]),
            c2_alpha=float(payload["c2_alpha"]),
            gamma_bound=float(payload["gamma_bound"]),
            C_bound=float(payload.get("C_bound", 2.0)),
            c2_argmin_t=float(payload.get("c2_argmin_t", math.inf)),
            c2_dirac=np.array(payload.get("c2_dirac", []), dtype=float),
            ratio_times=np.array(payload.get("ratio_times", []), dtype=float),
            ratio_values=np.array(payload.get("ratio_values", []), dtype=float),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CriteriaCertificate):
            return NotImplemented
        scalars = ("t0", "c1", "c2", "c2_alpha", "gamma_bound", "C_bound", "c2_argmin_t")
        arrays = ("c2_dirac", "ratio_times", "ratio_values")
        return (
            all(getattr(self, name) == getattr(other, name) for name in scalars)
            and self.nu == other.nu
            and all(np.array_equal(getattr(self, name), getattr(other, name)) for name in arrays)
        )

    __hash__ = None  # type: ignore[assignment]


def infimum_measure(rows: Sequence[np.ndarray] | np.ndarray) -> np.ndarray:
    """Largest measure dominated by every row (entrywise minimum)."""

    family = [np.asarray(row, dtype=float).reshape(-1) for row in rows]
    if not family:
        raise ValueError("infimum_measure needs at least one measure")
    length = family[0].shape[0]
    if any(row.shape[0] != length for row in family):
        raise ValueError("all measures must have the same length")
    stacked = np.vstack(family)
    if np.any(stacked < 0):
        raise ValueError("measures must be non-negative")
    return stacked.min(axis=0)


def conditioned_kernel(gen: AbsorbedGenerator, t0: float) -> np.ndarray:
    """Rows ``P_x(X_{t0} ∈ · | t0 < τ_∂)``."""

    kernel = transition_matrix(gen, t0)
    survival = kernel.sum(axis=1)
    if np.any(survival <= SURVIVAL_FLOOR):
        raise ValueError(f"survival at t0={t0} underflows; choose a smaller t0")
    return kernel / survival[:, None]


def certify_a1(gen: AbsorbedGenerator, t0: float) -> Tuple[DistributionVector, float]:
    """Minorizing law ``ν`` and maximal constant ``c₁`` at ``t0``."""

    if not t0 > 0:
        raise ValueError("t0 must be positive")
    rows = conditioned_kernel(gen, t0)
    raw = infimum_measure(rows)
    c1 = float(raw.sum())
    if c1 <= 0:
        raise CriteriaViolation(
            f"(A1) fails at this t₀={t0:g}: try larger t₀ or report failure", verdict="A1-FAIL"
        )
    c1 = min(c1, 1.0)
    nu = DistributionVector.from_weights(raw)
    slack = float((rows - c1 * nu.weights[None, :]).min())
    if slack < -MINORIZATION_SLACK:
        raise ArithmeticError(f"minorization re-check failed with slack {slack:.3e}")
    logger.debug("certified (A1) at t0=%g with c1=%.6g", t0, c1)
    return nu, c1


def _ratio_scans(
    gen: AbsorbedGenerator,
    measures: Iterable[Measure],
    triple: SpectralTriple,
    t_max: float,
    grid_step: float,
) -> List[RatioScan]:
    weights = [as_weights(measure) for measure in measures]
    if not t_max > 0 or not grid_step > 0:
        raise ValueError("t_max and grid_step must be positive")
    count = int(math.floor(t_max / grid_step + 1e-9))
    times = np.empty(count + 1)
    ratios = np.empty((len(weights), count + 1))
    for k, (t, profile, _) in enumerate(iter_survival_profiles(gen, grid_step, count)):
        times[k] = t
        for index, weight in enumerate(weights):
            ratios[index, k] = float(weight @ profile)
    eta_max = float(triple.eta.max())
    scans = []
    for index, weight in enumerate(weights):
        asymptote = float(weight @ triple.eta) / eta_max
        row = np.minimum(ratios[index], 1.0)
        k = int(np.argmin(row))
        if asymptote < row[k]:
            value, argmin_t = asymptote, math.inf
        else:
            value, argmin_t = float(row[k]), float(times[k])
        scans.append(RatioScan(min(value, 1.0), argmin_t, times, row, asymptote))
    return scans


def _check_t_max(gen: AbsorbedGenerator, triple: SpectralTriple, t_max: float, precision: float) -> None:
    error = float(eta_limit_profile(gen, triple, [t_max])[0])
    if error > precision * float(triple.eta.min()):
        raise CriteriaViolation(
            f"extend t_max: sup-error {error:.3e} of e^(λ0 t)P_x at t_max={t_max:g} "
            f"exceeds {precision:g}·min η",
            verdict="A2-EXTEND-TMAX",
        )


def certify_a2(
    gen: AbsorbedGenerator,
    nu: Measure,
    triple: SpectralTriple,
    t_max: float,
    grid_step: float,
    *,
    precision: float = 0.01,
) -> RatioScan:
    """``c₂ = inf_t P_ν(t<τ_∂) / max_x P_x(t<τ_∂)`` with its arg-min."""

    _check_t_max(gen, triple, t_max, precision)
    scan = _ratio_scans(gen, [nu], triple, t_max, grid_step)[0]
    if scan.value <= 0:
        raise CriteriaViolation("(A2) fails: survival ratio reaches 0", verdict="A2-FAIL")
    return scan


def c2_of_mu(
    gen: AbsorbedGenerator,
    mu: Measure,
    triple: SpectralTriple,
    t_max: float,
    grid_step: float,
    *,
    precision: float = 0.01,
) -> float:
    """``c₂(μ)``; the supremum over ``ρ`` is attained at Dirac masses on a finite space."""

    _check_t_max(gen, triple, t_max, precision)
    return _ratio_scans(gen, [mu], triple, t_max, grid_step)[0].value


def c2_dirac_profile(
    gen: AbsorbedGenerator, triple: SpectralTriple, t_max: float, grid_step: float
) -> np.ndarray:
    """``c₂(δ_x)`` for every state ``x``."""

    count = int(math.floor(t_max / grid_step + 1e-9))
    best = np.ones(gen.n)
    for _, profile, _ in iter_survival_profiles(gen, grid_step, count):
        best = np.minimum(best, profile)
    return np.minimum(best, triple.eta / triple.eta.max())


def explicit_bound(cert: CriteriaCertificate, t: float) -> float:
    """``2(1 - c₁c₂)^⌊t/t₀⌋``."""

    if t < 0:
        raise ValueError("t must be non-negative")
    return cert.C_bound * cert.contraction ** math.floor(t / cert.t0)


def gamma_from_constants(c1: float, c2: float, t0: float) -> float:
    product = c1 * c2
    if product >= 1:
        return math.inf
    return -math.log1p(-product) / t0


def c2_alpha_lower_bound(C: float, gamma: float, lambda0: float) -> float:
    """``sup_{s>0} exp(-λ₀s - C e^{(λ₀-γ)s} / (1 - e^{-γs}))``.

    The supremum is bracketed on a log-spaced grid of ``s`` and refined by
    golden-section search in ``log s``.
    """

    if not (C > 0 and gamma > 0 and lambda0 > 0):
        raise ValueError("C, gamma and lambda0 must all be positive")

    def negative_log(log_s: float) -> float:
        s = math.exp(log_s)
        with np.errstate(over="ignore"):
            growth = float(np.exp((lambda0 - gamma) * s))
        return lambda0 * s + C * growth / -math.expm1(-gamma * s)

    grid = np.linspace(math.log(1e-14), math.log(1e4), 721)
    values = np.array([negative_log(point) for point in grid])
    best = int(np.argmin(values))
    minimum = float(values[best])
    if 0 < best < grid.size - 1:
        result = minimize_scalar(
            negative_log,
            bracket=(grid[best - 1], grid[best], grid[best + 1]),
            method="golden",
            tol=1e-12,
        )
        minimum = min(minimum, float(result.fun))
    return math.exp(-minimum)


def choose_t_max(gen: AbsorbedGenerator, triple: SpectralTriple, config: CertificationConfig) -> float:
    """Smallest horizon of the form ``factor·growth^k / λ₀`` meeting the η precondition."""

    t_max = config.t_max_factor / triple.lambda0
    for _ in range(config.max_extensions + 1):
        error = float(eta_limit_profile(gen, triple, [t_max])[0])
        if error <= config.eta_precision * float(triple.eta.min()):
            return t_max
        t_max *= config.t_max_growth
    raise CriteriaViolation(
        f"extend t_max: η precondition unmet up to t_max={t_max:g}", verdict="A2-EXTEND-TMAX"
    )


def certify(
    gen: AbsorbedGenerator,
    triple: SpectralTriple,
    *,
    t0: float | None = None,
    t_max: float | None = None,
    grid_step: float | None = None,
    config: CertificationConfig | None = None,
) -> CriteriaCertificate:
    """Certify (A1) and (A2); without ``t0`` the candidate factors are searched.

    The retained ``t0`` maximises ``c₁c₂``.  ``grid_step`` defaults to
    ``t0 · config.grid_fraction`` and may not exceed ``t0 / 4``.
    """

    config = config or CertificationConfig()
    if t_max is None:
        t_max = choose_t_max(gen, triple, config)
    candidates = [t0] if t0 is not None else [f / triple.lambda0 for f in config.t0_factors]
    best: Tuple[float, float, DistributionVector, float, RatioScan] | None = None
    failure: CriteriaViolation | None = None
    for candidate in candidates:
        step = grid_step if grid_step is not None else candidate * config.grid_fraction
        if step > candidate / 4 * (1 + 1e-12):
            raise ValueError(f"grid_step {step:g} exceeds t0/4 for t0={candidate:g}")
        try:
            nu, c1 = certify_a1(gen, candidate)
            scan = certify_a2(gen, nu, triple, t_max, step, precision=config.eta_precision)
        except CriteriaViolation as exc:
            logger.debug("t0=%g rejected: %s", candidate, exc)
            failure = exc
            continue
        logger.debug("t0=%g: c1=%.6g c2=%.6g", candidate, c1, scan.value)
        if best is None or c1 * scan.value > best[0]:
            best = (c1 * scan.value, candidate, nu, c1, scan)
    if best is None:
        assert failure is not None
        raise failure
    _, chosen, nu, c1, scan = best
    step = grid_step if grid_step is not None else chosen * config.grid_fraction
    alpha_scan = _ratio_scans(gen, [triple.alpha], triple, t_max, step)[0]
    return CriteriaCertificate(
        t0=chosen,
        nu=nu,
        c1=c1,
        c2=scan.value,
        c2_alpha=alpha_scan.value,
        gamma_bound=gamma_from_constants(c1, scan.value, chosen),
        c2_argmin_t=scan.argmin_t,
        c2_dirac=c2_dirac_profile(gen, triple, t_max, step),
        ratio_times=scan.times,
        ratio_values=scan.ratios,
    )
