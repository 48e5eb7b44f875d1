"""Transition, survival and conditioning operators of an absorbed chain.

Everything is computed by uniformization: with ``Λ`` the largest total
outflow, ``P = I + L/Λ`` is sub-stochastic and

    exp(hL) = Σ_k Poisson(k; Λh) P^k.

The series is truncated once the Poisson tail drops below
:data:`POISSON_TAIL`, so every operator stays entrywise non-negative.  Long
horizons are covered by repeating a short step, which also lets the vector
operators renormalise after every block and never underflow.
"""
from __future__ import annotations

import logging
import math
from typing import Callable, Iterator, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.stats import poisson

from ..errors import HorizonTooDeepError
from .generator import AbsorbedGenerator, DistributionVector

logger = logging.getLogger(__name__)

POISSON_TAIL = 1e-14
# Largest Λh handled by a single Poisson series.
STEP_RATE_TIME = 2.0
# Smallest per-block survival mass accepted while conditioning.
SURVIVAL_FLOOR = 1e-280
# Blocks cover at most this many mean absorption times of the fastest state.
BLOCK_DEPTH = 5.0

Measure = Union[DistributionVector, np.ndarray]


def _check_time(value: float, name: str = "t") -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a finite non-negative time, got {value}")
    return value


def as_weights(measure: Measure) -> np.ndarray:
    """Plain float array behind a measure or array-like."""

    if isinstance(measure, DistributionVector):
        return np.array(measure.weights)
    return np.array(measure, dtype=float).reshape(-1)


def _poisson_weights(rate_time: float) -> np.ndarray:
    if rate_time == 0:
        return np.ones(1)
    cutoff = int(poisson.isf(POISSON_TAIL, rate_time)) + 1
    return poisson.pmf(np.arange(cutoff + 1), rate_time)


def uniformized(gen: AbsorbedGenerator) -> Tuple[Union[np.ndarray, sparse.csr_array], float]:
    """``(I + L/Λ, Λ)`` with ``Λ`` the largest outflow."""

    rate = gen.uniformization_rate
    if rate == 0:
        identity = sparse.eye_array(gen.n, format="csr") if gen.is_sparse else np.eye(gen.n)
        return identity, 0.0
    if gen.is_sparse:
        return (sparse.eye_array(gen.n, format="csr") + gen.matrix() / rate).tocsr(), rate
    return np.eye(gen.n) + gen.matrix() / rate, rate


def _step_count(gen: AbsorbedGenerator, t: float) -> int:
    return max(1, math.ceil(gen.uniformization_rate * t / STEP_RATE_TIME))


def _series_matrix(uniform: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Horner evaluation of Σ_k w_k P^k."""

    n = uniform.shape[0]
    result = weights[-1] * np.eye(n)
    for weight in weights[-2::-1]:
        result = result @ uniform
        result[np.diag_indices(n)] += weight
    return result


class _Stepper:
    """Applies exp(hL) repeatedly to vectors from either side."""

    def __init__(self, gen: AbsorbedGenerator, h: float) -> None:
        uniform, rate = uniformized(gen)
        self.weights = _poisson_weights(rate * h)
        self.uniform = uniform
        self.matrix: np.ndarray | None = None
        if not gen.is_sparse:
            self.matrix = _series_matrix(uniform, self.weights)

    def block(self, steps: int) -> Callable[[np.ndarray, str], np.ndarray]:
        if self.matrix is not None:
            power = np.linalg.matrix_power(self.matrix, steps)

            def apply_dense(vector: np.ndarray, side: str) -> np.ndarray:
                return vector @ power if side == "left" else power @ vector

            return apply_dense

        def apply_sparse(vector: np.ndarray, side: str) -> np.ndarray:
            for _ in range(steps):
                vector = self._series_vector(vector, side)
            return vector

        return apply_sparse

    def _series_vector(self, vector: np.ndarray, side: str) -> np.ndarray:
        result = self.weights[-1] * vector
        for weight in self.weights[-2::-1]:
            result = result @ self.uniform if side == "left" else self.uniform @ result
            result = result + weight * vector
        return result


def _propagate(
    gen: AbsorbedGenerator,
    vector: np.ndarray,
    t: float,
    *,
    side: str,
    floor: float | None = None,
) -> Tuple[np.ndarray, float]:
    """Apply ``exp(tL)`` with renormalisation after every block.

    Returns the rescaled vector and the natural log of the accumulated scale:
    the exact result is ``vector * exp(log_scale)``.  Left products are
    scaled by their mass, right products by their maximum.
    """

    vector = np.array(vector, dtype=float)
    if t == 0 or gen.n == 0:
        return vector, 0.0
    steps = _step_count(gen, t)
    h = t / steps
    max_kill = float(gen.kill.max())
    per_block = steps if max_kill == 0 else max(1, int(BLOCK_DEPTH / (max_kill * h)))
    per_block = min(per_block, steps)
    stepper = _Stepper(gen, h)
    full_blocks, remainder = divmod(steps, per_block)
    log_scale = 0.0
    schedule = [(stepper.block(per_block), full_blocks)]
    if remainder:
        schedule.append((stepper.block(remainder), 1))
    for apply, repeats in schedule:
        for _ in range(repeats):
            vector = apply(vector, side)
            scale = float(vector.sum() if side == "left" else vector.max())
            if floor is not None and scale <= floor:
                raise HorizonTooDeepError(
                    "horizon too deep: renormalize stepwise (survival mass "
                    f"{scale:.3g} per block is below {floor:.0e})"
                )
            if scale <= 0:
                return np.zeros_like(vector), -math.inf
            vector = vector / scale
            log_scale += math.log(scale)
    logger.debug("propagated %s over t=%g in %d steps of %g", side, t, steps, h)
    return vector, log_scale


def transition_matrix(gen: AbsorbedGenerator, t: float) -> np.ndarray:
    """Sub-stochastic matrix ``P_t`` on ``E``; row ``x`` sums to ``P_x(t<τ_∂)``."""

    t = _check_time(t)
    if t == 0:
        return np.eye(gen.n)
    if gen.is_sparse:
        gen = AbsorbedGenerator(gen.rates.toarray(), gen.kill)
    steps = _step_count(gen, t)
    stepper = _Stepper(gen, t / steps)
    return np.linalg.matrix_power(stepper.matrix, steps)


def log_survival_probability(gen: AbsorbedGenerator, mu: Measure, t: float) -> float:
    """Natural log of ``P_μ(t<τ_∂)``, usable far beyond float underflow."""

    t = _check_time(t)
    weights = as_weights(mu)
    if weights.shape[0] != gen.n:
        raise ValueError("initial law does not match the chain size")
    mass = weights.sum()
    if abs(mass - 1.0) > 1e-12:
        raise ValueError("initial law must be normalized")
    _, log_scale = _propagate(gen, weights, t, side="left")
    return log_scale


def survival_probability(gen: AbsorbedGenerator, mu: Measure, t: float) -> float:
    """``P_μ(t<τ_∂) = μ P_t 1_E``."""

    return math.exp(log_survival_probability(gen, mu, t))


def survival_profile(gen: AbsorbedGenerator, t: float) -> Tuple[np.ndarray, float]:
    """``P_t 1_E`` as (vector scaled to max 1, log of the scale)."""

    t = _check_time(t)
    return _propagate(gen, np.ones(gen.n), t, side="right")


def condition(gen: AbsorbedGenerator, mu: Measure, t: float) -> DistributionVector:
    """Conditional law ``P_μ(X_t ∈ · | t < τ_∂)``."""

    t = _check_time(t)
    weights = as_weights(mu)
    if weights.shape[0] != gen.n:
        raise ValueError("initial law does not match the chain size")
    if t == 0:
        return DistributionVector.from_weights(weights)
    vector, _ = _propagate(gen, weights / weights.sum(), t, side="left", floor=SURVIVAL_FLOOR)
    return DistributionVector.from_weights(vector)


def conditional_semigroup_apply(
    gen: AbsorbedGenerator, mu: Measure, s: float, t: float, T: float
) -> DistributionVector:
    """Apply the time-inhomogeneous kernel of the chain conditioned on ``T < τ_∂``.

    ``δ_x R^T_{s,t}`` is the law at time ``t`` of the chain started from ``x``
    at time ``s`` and conditioned to survive up to ``T``; a general ``mu`` is
    the mixture ``Σ_x μ(x) δ_x R^T_{s,t}``, which keeps the family a
    composable Markov kernel.
    """

    s, t, T = _check_time(s, "s"), _check_time(t, "t"), _check_time(T, "T")
    if not s <= t <= T:
        raise ValueError(f"need 0 <= s <= t <= T, got s={s}, t={t}, T={T}")
    weights = as_weights(mu)
    if weights.shape[0] != gen.n:
        raise ValueError("initial law does not match the chain size")
    if s == t:
        return DistributionVector.from_weights(weights)
    # Both survival profiles share one scale, which cancels in the ratio.
    late, _ = _propagate(gen, np.ones(gen.n), T - t, side="right")
    early, _ = _propagate(gen, late, t - s, side="right")
    reweighted = np.divide(weights, early, out=np.zeros_like(weights), where=weights > 0)
    moved, _ = _propagate(gen, reweighted, t - s, side="left", floor=SURVIVAL_FLOOR)
    return DistributionVector.from_weights(moved * late)


def tv_distance(mu1: Measure, mu2: Measure) -> float:
    """Total mass of ``|μ₁ - μ₂|`` (equals 2 for disjoint probability laws)."""

    first, second = as_weights(mu1), as_weights(mu2)
    if first.shape != second.shape:
        raise ValueError(f"length mismatch: {first.shape[0]} vs {second.shape[0]}")
    return float(np.abs(first - second).sum())


def iter_survival_profiles(
    gen: AbsorbedGenerator, step: float, count: int
) -> Iterator[Tuple[float, np.ndarray, float]]:
    """Yield ``(k·step, P_{k·step}1_E scaled to max 1, log scale)`` for k = 0..count."""

    step = _check_time(step, "step")
    if step == 0:
        raise ValueError("step must be positive")
    inner = _step_count(gen, step)
    apply = _Stepper(gen, step / inner).block(inner)
    profile = np.ones(gen.n)
    log_scale = 0.0
    yield 0.0, profile, log_scale
    for k in range(1, count + 1):
        profile = apply(profile, "right")
        scale = float(profile.max())
        profile = profile / scale
        log_scale += math.log(scale)
        yield k * step, profile, log_scale
