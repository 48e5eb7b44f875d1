"""Convergence test of the birth-death series that decides coming down from infinity.

For birth rates ``b_k`` and death rates ``d_k`` (k ≥ 1) the series is

    S = Σ_{k≥1} 1/(d_k α_k) Σ_{l≥k} α_l,   α_k = (b_1⋯b_{k-1}) / (d_1⋯d_k),

and the ``z``-shifted variant starts the outer sum at ``k = z + 1``; it equals
``sup_n E_n(T_z)``, the time needed to come down to level ``z``.  Every
product is kept in log-space.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Protocol

import numpy as np

logger = logging.getLogger(__name__)

# Number of trailing terms inspected by the verdict tests.
VERDICT_WINDOW = 200
# Increment size that counts as "not vanishing" for the divergence verdict.
DIVERGENCE_INCREMENT = 1e-8
# Largest term ratio accepted by the geometric tail certificate.
GEOMETRIC_RATIO = 0.99
# Smallest polynomial decay exponent accepted by the power-law certificate.
POWER_EXPONENT = 1.01
# Relative size under which the inner tail Σ_{l>M} α_l is dropped.
INNER_TAIL = 1e-17


class RateSource(Protocol):
    b: Callable[[np.ndarray], np.ndarray]
    d: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class SeriesReport:
    """Partial sums ``S_K`` for ``K = z+1 .. K_max`` and the verdict."""

    cutoffs: np.ndarray
    partial_sums: np.ndarray
    verdict: str
    tail_bound: float | None = None
    z: int = 0

    @property
    def total(self) -> float:
        return float(self.partial_sums[-1])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cutoffs": self.cutoffs.tolist(),
            "partial_sums": self.partial_sums.tolist(),
            "verdict": self.verdict,
            "tail_bound": self.tail_bound,
            "z": self.z,
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "SeriesReport":
        tail = payload.get("tail_bound")
        return cls(
            cutoffs=np.array(payload["cutoffs"], dtype=np.int64),
            partial_sums=np.array(payload["partial_sums"], dtype=float),
            verdict=payload["verdict"],
            tail_bound=None if tail is None else float(tail),
            z=int(payload.get("z", 0)),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SeriesReport):
            return NotImplemented
        return (
            np.array_equal(self.cutoffs, other.cutoffs)
            and np.array_equal(self.partial_sums, other.partial_sums)
            and self.verdict == other.verdict
            and self.tail_bound == other.tail_bound
            and self.z == other.z
        )

    __hash__ = None  # type: ignore[assignment]


def _rates(sequence: Callable[[np.ndarray], np.ndarray], levels: np.ndarray, name: str) -> np.ndarray:
    values = np.asarray(sequence(levels), dtype=float)
    values = np.broadcast_to(values, levels.shape).astype(float)
    if np.any(np.isnan(values)):
        raise ValueError(f"{name} rates contain NaN")
    if np.any(values < 0):
        raise ValueError(f"{name} rates must be non-negative")
    return values


def log_alpha(spec: RateSource, count: int) -> np.ndarray:
    """``log α_k`` for ``k = 1..count`` (``-inf`` once a birth rate vanishes)."""

    levels = np.arange(1, count + 1, dtype=float)
    births = _rates(spec.b, levels, "birth")
    deaths = _rates(spec.d, levels, "death")
    if np.any(deaths <= 0):
        raise ValueError("death rates must be positive")
    with np.errstate(divide="ignore"):
        log_b = np.log(births)
    log_d = np.log(deaths)
    return np.concatenate([[0.0], np.cumsum(log_b[:-1])]) - np.cumsum(log_d)


def _suffix_logsumexp(values: np.ndarray) -> np.ndarray:
    return np.logaddexp.accumulate(values[::-1])[::-1]


def _series_terms(spec: RateSource, K_max: int) -> tuple[np.ndarray, bool]:
    """Terms ``1/(d_k α_k) Σ_{l≥k} α_l`` for ``k = 1..K_max``.

    Returns the terms and whether the inner sums are finite (the ``α_l``
    tail became negligible before the extension cap).
    """

    depth = max(2 * K_max, K_max + 200)
    cap = 16 * K_max
    while True:
        logs = log_alpha(spec, depth)
        tails = _suffix_logsumexp(logs)
        if not np.isfinite(tails[K_max - 1]) or logs[-1] - tails[K_max - 1] < math.log(INNER_TAIL):
            finite = True
            break
        if depth >= cap:
            # α is not summable on the explored range.
            finite = False
            break
        depth = min(2 * depth, cap)
    levels = np.arange(1, K_max + 1, dtype=float)
    log_d = np.log(_rates(spec.d, levels, "death"))
    return np.exp(tails[:K_max] - log_d - logs[:K_max]), finite


def _geometric_tail(terms: np.ndarray) -> float | None:
    window = terms[-VERDICT_WINDOW:]
    if window.size < 2 or np.any(window <= 0):
        return None
    ratios = window[1:] / window[:-1]
    rho = float(ratios.max())
    if rho > GEOMETRIC_RATIO or ratios[-1] > ratios[0] * (1 + 1e-9):
        return None
    return float(window[-1] * rho / (1 - rho))


def _power_tail(terms: np.ndarray, last_level: int) -> float | None:
    window = terms[-VERDICT_WINDOW:]
    if window.size < 2 or np.any(window <= 0):
        return None
    levels = np.arange(last_level - window.size + 1, last_level + 1, dtype=float)
    raabe = levels[:-1] * (window[:-1] / window[1:] - 1)
    exponent = float(raabe.min())
    if exponent <= POWER_EXPONENT:
        return None
    # k^q t_k must be non-increasing on the window for the integral comparison.
    q = 0.5 * (1 + exponent)
    scaled = q * np.log(levels) + np.log(window)
    if np.any(np.diff(scaled) > 1e-12):
        return None
    return float(window[-1] * last_level / (q - 1))


def s_series(spec: RateSource, K_max: int, z: int = 0) -> SeriesReport:
    """Partial sums of the (``z``-shifted) series with a convergence verdict.

    ``converged`` needs a certified tail: either the term ratios stay below
    :data:`GEOMETRIC_RATIO` without increasing, or the Raabe exponent stays
    above :data:`POWER_EXPONENT` (``k^q t_k`` non-increasing, ``q > 1``).
    ``diverging`` needs :data:`VERDICT_WINDOW` consecutive increments above
    :data:`DIVERGENCE_INCREMENT`, or an inner sum that does not converge.
    """

    if K_max < 10:
        raise ValueError("K_max must be at least 10")
    if not 0 <= z < K_max:
        raise ValueError("z must satisfy 0 <= z < K_max")
    if np.any(_rates(spec.b, np.arange(1, K_max + 1, dtype=float), "birth") <= 0):
        raise ValueError("birth rates must be positive on 1..K_max")
    terms, finite = _series_terms(spec, K_max)
    terms = terms[z:]
    cutoffs = np.arange(z + 1, K_max + 1, dtype=np.int64)
    partial = np.cumsum(terms)
    verdict, tail = "inconclusive", None
    if not finite:
        verdict = "diverging"
    elif np.all(terms[-VERDICT_WINDOW:] == 0):
        verdict, tail = "converged", 0.0
    else:
        tail = _geometric_tail(terms)
        if tail is None:
            tail = _power_tail(terms, K_max)
        if tail is not None:
            verdict = "converged"
        elif terms.size >= VERDICT_WINDOW and np.all(terms[-VERDICT_WINDOW:] > DIVERGENCE_INCREMENT):
            verdict = "diverging"
    logger.debug("s_series K_max=%d z=%d: %s (S=%.6g)", K_max, z, verdict, partial[-1])
    return SeriesReport(cutoffs=cutoffs, partial_sums=partial, verdict=verdict, tail_bound=tail, z=z)


def come_down_time(spec: RateSource, z: int, K_max: int) -> SeriesReport:
    """``sup_n E_n(T_z)`` as the ``z``-shifted series."""

    return s_series(spec, K_max, z)
