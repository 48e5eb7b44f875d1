"""Total-variation convergence curves and the inequalities they must satisfy."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import linregress

from ..chain.generator import AbsorbedGenerator
from ..chain.semigroup import Measure, as_weights, transition_matrix
from .certificate import CriteriaCertificate, explicit_bound

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TvCurve:
    """``‖φ_t(μ_i) - α‖_TV`` for each start ``i`` on a uniform grid."""

    times: np.ndarray
    distances: np.ndarray  # shape (len(times), number of starts)

    @property
    def sup(self) -> np.ndarray:
        return self.distances.max(axis=1)


@dataclass(frozen=True)
class ConvergenceFit:
    C: float
    gamma: float
    points: int


def _grid(t_max: float, step: float) -> np.ndarray:
    if not step > 0 or t_max < 0:
        raise ValueError("need step > 0 and t_max >= 0")
    count = int(math.floor(t_max / step + 1e-9))
    return step * np.arange(count + 1)


def conditioned_flow(
    gen: AbsorbedGenerator, starts: np.ndarray, t_max: float, step: float
) -> tuple[np.ndarray, np.ndarray]:
    """Conditioned laws ``φ_t(μ)`` of every row of ``starts`` on a uniform grid.

    Returns ``(times, laws)`` with ``laws`` of shape (times, starts, states).
    """

    times = _grid(t_max, step)
    rows = np.array(starts, dtype=float)
    rows = rows / rows.sum(axis=1, keepdims=True)
    kernel = transition_matrix(gen, step)
    laws = np.empty((times.size,) + rows.shape)
    for index in range(times.size):
        laws[index] = rows
        rows = rows @ kernel
        rows = rows / rows.sum(axis=1, keepdims=True)
    return times, laws


def tv_to_qsd_curve(
    gen: AbsorbedGenerator,
    alpha: Measure,
    t_max: float,
    step: float,
    starts: Sequence[int] | None = None,
) -> TvCurve:
    """Distance to the QSD from Dirac starts (all states by default)."""

    indices = np.arange(gen.n) if starts is None else np.asarray(starts)
    target = as_weights(alpha)
    times, laws = conditioned_flow(gen, np.eye(gen.n)[indices], t_max, step)
    distances = np.abs(laws - target[None, None, :]).sum(axis=2)
    return TvCurve(times=times, distances=distances)


def bound_curve(cert: CriteriaCertificate, times: np.ndarray) -> np.ndarray:
    return np.array([explicit_bound(cert, float(t)) for t in times])


def master_bound_slack(cert: CriteriaCertificate, curve: TvCurve) -> float:
    """Smallest ``bound(t) - sup_x TV(t)``; negative means the bound is violated."""

    return float((bound_curve(cert, curve.times) - curve.sup).min())


def lipschitz_slack(
    gen: AbsorbedGenerator,
    cert: CriteriaCertificate,
    mu1: Measure,
    mu2: Measure,
    c2_mu1: float,
    c2_mu2: float,
    t_max: float,
    step: float,
) -> np.ndarray:
    """``bound - ‖φ_t(μ₁) - φ_t(μ₂)‖_TV`` along the grid.

    The bound is ``(1 - c₁c₂)^⌊t/t₀⌋ ‖μ₁ - μ₂‖_TV / min(c₂(μ₁), c₂(μ₂))``.
    """

    first, second = as_weights(mu1), as_weights(mu2)
    times, laws = conditioned_flow(gen, np.vstack([first, second]), t_max, step)
    distance = np.abs(laws[:, 0] - laws[:, 1]).sum(axis=1)
    initial = float(np.abs(first / first.sum() - second / second.sum()).sum())
    powers = np.array([cert.contraction ** math.floor(t / cert.t0) for t in times])
    bound = powers * initial / min(c2_mu1, c2_mu2)
    return bound - distance


def mixing_integral(curve: TvCurve, cert: CriteriaCertificate) -> float:
    """``∫_0^∞ sup_x ‖φ_t(δ_x) - α‖_TV dt``.

    The grid part is integrated by the trapezoid rule; beyond the grid the
    certified bound ``2(1 - c₁c₂)^⌊t/t₀⌋`` closes the integral.
    """

    inside = float(trapezoid(curve.sup, curve.times))
    q = cert.contraction
    if q == 0:
        return inside
    start = int(math.floor(curve.times[-1] / cert.t0))
    tail = cert.C_bound * cert.t0 * q**start / (1 - q)
    return inside + tail


def fit_convergence_rate(curve: TvCurve, floor: float = 1e-12) -> ConvergenceFit:
    """Least-squares ``(C, γ)`` with ``sup_x TV(t) ≈ C e^{-γt}``."""

    sup = curve.sup
    keep = (curve.times > 0) & (sup > floor)
    if keep.sum() < 3:
        raise ValueError("too few points above the floor to fit a rate")
    fit = linregress(curve.times[keep], np.log(sup[keep]))
    logger.debug("fitted convergence rate %.6g (r=%.4f)", -fit.slope, fit.rvalue)
    return ConvergenceFit(C=float(math.exp(fit.intercept)), gamma=float(-fit.slope), points=int(keep.sum()))
