"""Monte Carlo estimators for the absorbed transport process."""
from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from ..chain.generator import SurvivalCurve
from ..chain.semigroup import tv_distance
from ..errors import HorizonTooDeepError
from .transport import InitialLaw, NeutronSpec, SimulationConfig, block_stream, simulate_cloud

logger = logging.getLogger(__name__)

MIN_SURVIVAL_PARTICLES = 1_000
MIN_QSD_PARTICLES = 10_000
MIN_WINDOW_POINTS = 4
MIN_WINDOW_SURVIVORS = 50
CONFIDENCE = 0.95
# Block index reserved for the single Fleming-Viot stream.
FLEMING_VIOT_STREAM = 2**63
MODES = ("naive", "fleming_viot")


def clopper_pearson(successes: np.ndarray, trials: int, confidence: float = CONFIDENCE) -> Tuple[np.ndarray, np.ndarray]:
    """Exact binomial interval for ``successes`` out of ``trials``."""

    k = np.asarray(successes, dtype=float)
    tail = (1 - confidence) / 2
    with np.errstate(invalid="ignore"):
        lower = stats.beta.ppf(tail, k, trials - k + 1)
        upper = stats.beta.ppf(1 - tail, k + 1, trials - k)
    lower = np.where(k == 0, 0.0, lower)
    upper = np.where(k == trials, 1.0, upper)
    return lower, upper


def estimate_survival_curve(
    spec: NeutronSpec,
    init: InitialLaw,
    N: int,
    t_grid: Sequence[float],
    seed: int,
    config: SimulationConfig | None = None,
) -> SurvivalCurve:
    """Fraction of ``N`` particles alive at each grid time, with 95% intervals."""

    if N < MIN_SURVIVAL_PARTICLES:
        raise ValueError(f"survival curves need N >= {MIN_SURVIVAL_PARTICLES}, got {N}")
    times = np.asarray(t_grid, dtype=float)
    if times.size == 0 or np.any(times < 0):
        raise ValueError("time grid must be non-empty and non-negative")
    outcome = simulate_cloud(spec, init, N, float(times[-1]), seed, config)
    ordered = np.sort(outcome.absorption)
    survivors = N - np.searchsorted(ordered, times, side="right")
    if survivors[0] == 0:
        logger.warning("all %d particles were absorbed before t=%g", N, times[0])
    lower, upper = clopper_pearson(survivors, N)
    return SurvivalCurve(
        times=times,
        values=survivors / N,
        ci_lo=lower,
        ci_hi=upper,
        survivors=survivors,
        n_particles=N,
    )


@dataclass(frozen=True)
class WindowFit:
    window: Tuple[float, float]
    rate: float
    stderr: float
    points: int


@dataclass(frozen=True)
class DecayRateEstimate:
    """Slope of ``-log S(t)`` on a window, with fits on shifted windows."""

    rate: float
    stderr: float
    window: Tuple[float, float]
    points: int
    sensitivity: Tuple[WindowFit, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rate": self.rate,
            "stderr": self.stderr,
            "window": list(self.window),
            "points": self.points,
            "sensitivity": [
                {"window": list(fit.window), "rate": fit.rate, "stderr": fit.stderr, "points": fit.points}
                for fit in self.sensitivity
            ],
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "DecayRateEstimate":
        return cls(
            rate=float(payload["rate"]),
            stderr=float(payload["stderr"]),
            window=tuple(payload["window"]),
            points=int(payload["points"]),
            sensitivity=tuple(
                WindowFit(window=tuple(fit["window"]), rate=float(fit["rate"]), stderr=float(fit["stderr"]), points=int(fit["points"]))
                for fit in payload.get("sensitivity", [])
            ),
        )


def _fit_window(curve: SurvivalCurve, t_a: float, t_b: float) -> WindowFit:
    times = curve.times
    if t_a >= t_b or t_a < times[0] or t_b > times[-1]:
        raise ValueError(f"window [{t_a}, {t_b}] is not inside [{times[0]}, {times[-1]}]")
    mask = (times >= t_a) & (times <= t_b)
    points = int(mask.sum())
    if points < MIN_WINDOW_POINTS:
        raise ValueError(f"window [{t_a}, {t_b}] holds {points} grid points, need {MIN_WINDOW_POINTS}")
    t = times[mask]
    values = curve.values[mask]
    if curve.survivors is not None:
        last = int(curve.survivors[mask][-1])
        if last < MIN_WINDOW_SURVIVORS:
            raise ValueError(f"only {last} survivors at t={t[-1]}, need {MIN_WINDOW_SURVIVORS}")
    if np.any(values <= 0):
        raise ValueError("survival must be positive on the regression window")
    fit = stats.linregress(t, np.log(values))
    if curve.survivors is not None and curve.n_particles:
        # Cov(log S(s), log S(t)) = (1 - S(s)) / (N S(s)) for s <= t.
        earlier = values[np.minimum.outer(np.arange(points), np.arange(points))]
        covariance = (1 - earlier) / (curve.n_particles * earlier)
        centred = t - t.mean()
        weights = centred / np.dot(centred, centred)
        stderr = float(math.sqrt(max(weights @ covariance @ weights, 0.0)))
    else:
        stderr = float(fit.stderr)
    return WindowFit(window=(float(t_a), float(t_b)), rate=float(-fit.slope), stderr=stderr, points=points)


def estimate_lambda0(curve: SurvivalCurve, window: Tuple[float, float]) -> DecayRateEstimate:
    """Decay rate from a log-linear fit of the survival curve on ``window``.

    Fits on the window shifted by a quarter of its width either way are
    reported as a sensitivity check when they fit inside the curve.
    """

    t_a, t_b = float(window[0]), float(window[1])
    main = _fit_window(curve, t_a, t_b)
    shift = (t_b - t_a) / 4
    sensitivity: List[WindowFit] = []
    for offset in (-shift, 0.0, shift):
        try:
            sensitivity.append(main if offset == 0 else _fit_window(curve, t_a + offset, t_b + offset))
        except ValueError as exc:
            logger.debug("skipping shifted window %+g: %s", offset, exc)
    return DecayRateEstimate(
        rate=main.rate, stderr=main.stderr, window=main.window, points=main.points, sensitivity=tuple(sensitivity)
    )


@dataclass(frozen=True, eq=False)
class QsdHistogram:
    """Normalised histogram over position cells × direction arcs."""

    edges_x: np.ndarray
    edges_y: np.ndarray
    edges_angle: np.ndarray
    mass: np.ndarray
    effective_sample_size: float
    n_particles: int
    mode: str
    survival_estimate: float

    @property
    def cell_count(self) -> int:
        return int(self.mass.size)

    def cells(self) -> List[Tuple[float, float, float, float, float, float, float]]:
        """``(x_lo, x_hi, y_lo, y_hi, a_lo, a_hi, mass)`` in C order."""

        rows = []
        for (i, j, k), value in np.ndenumerate(self.mass):
            rows.append(
                (
                    float(self.edges_x[i]), float(self.edges_x[i + 1]),
                    float(self.edges_y[j]), float(self.edges_y[j + 1]),
                    float(self.edges_angle[k]), float(self.edges_angle[k + 1]),
                    float(value),
                )
            )
        return rows

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QsdHistogram):
            return NotImplemented
        return (
            all(np.array_equal(getattr(self, name), getattr(other, name)) for name in ("edges_x", "edges_y", "edges_angle", "mass"))
            and self.effective_sample_size == other.effective_sample_size
            and self.n_particles == other.n_particles
            and self.mode == other.mode
            and self.survival_estimate == other.survival_estimate
        )

    __hash__ = None  # type: ignore[assignment]


def _histogram(spec: NeutronSpec, x: np.ndarray, u: np.ndarray, bins: Tuple[int, int, int]) -> Tuple[np.ndarray, ...]:
    xmin, xmax, ymin, ymax = spec.domain.bounding_box
    edges_x = np.linspace(xmin, xmax, bins[0] + 1)
    edges_y = np.linspace(ymin, ymax, bins[1] + 1)
    edges_angle = np.linspace(0.0, 2 * math.pi, bins[2] + 1)
    angles = np.mod(np.arctan2(u[:, 1], u[:, 0]), 2 * math.pi)
    counts, _ = np.histogramdd(np.column_stack([x, angles]), bins=[edges_x, edges_y, edges_angle])
    return edges_x, edges_y, edges_angle, counts


def _fleming_viot(
    spec: NeutronSpec, init: InitialLaw, N: int, t_star: float, seed: int
) -> Tuple[np.ndarray, np.ndarray, int]:
    """Event-driven particle system; returns final states and the number of restarts."""

    rng = block_stream(seed, FLEMING_VIOT_STREAM)
    x0, u0 = init.sample(spec.domain, rng, N)
    px, py = x0[:, 0].tolist(), x0[:, 1].tolist()
    ux, uy = u0[:, 0].tolist(), u0[:, 1].tolist()
    stamp = [0.0] * N
    draws = _Draws(rng, spec.lambda_jump, N)
    exit_scalar = spec.domain.exit_time_scalar
    events: List[Tuple[float, int, bool]] = []

    def schedule(i: int, now: float) -> None:
        flight = draws.flight()
        to_wall = exit_scalar(px[i], py[i], ux[i], uy[i])
        if to_wall <= flight:
            heapq.heappush(events, (now + to_wall, i, True))
        else:
            heapq.heappush(events, (now + flight, i, False))

    for i in range(N):
        schedule(i, 0.0)
    restarts = 0
    while events and events[0][0] <= t_star:
        now, i, absorbed = heapq.heappop(events)
        if absorbed:
            restarts += 1
            j = draws.other(i)
            elapsed = now - stamp[j]
            px[i], py[i] = px[j] + elapsed * ux[j], py[j] + elapsed * uy[j]
            ux[i], uy[i] = ux[j], uy[j]
        else:
            elapsed = now - stamp[i]
            px[i], py[i] = px[i] + elapsed * ux[i], py[i] + elapsed * uy[i]
            ux[i], uy[i] = draws.direction()
        stamp[i] = now
        schedule(i, now)
    elapsed = t_star - np.asarray(stamp)
    u = np.column_stack([ux, uy])
    x = np.column_stack([px, py]) + elapsed[:, None] * u
    return x, u, restarts


class _Draws:
    """Buffered variates from one stream, consumed in event order."""

    CHUNK = 8192

    def __init__(self, rng: np.random.Generator, rate: float, population: int) -> None:
        self._rng = rng
        self._scale = 1.0 / rate
        self._population = population
        self._flights: List[float] = []
        self._angles: List[float] = []
        self._picks: List[int] = []

    def flight(self) -> float:
        if not self._flights:
            self._flights = self._rng.exponential(self._scale, self.CHUNK).tolist()[::-1]
        return self._flights.pop()

    def direction(self) -> Tuple[float, float]:
        if not self._angles:
            self._angles = self._rng.uniform(0.0, 2 * math.pi, self.CHUNK).tolist()[::-1]
        angle = self._angles.pop()
        return math.cos(angle), math.sin(angle)

    def other(self, i: int) -> int:
        """Uniform index among the ``population - 1`` particles other than ``i``."""

        if not self._picks:
            self._picks = self._rng.integers(0, self._population - 1, self.CHUNK).tolist()[::-1]
        j = self._picks.pop()
        return j + 1 if j >= i else j


def estimate_qsd(
    spec: NeutronSpec,
    t_star: float,
    N: int,
    mode: str,
    bins: Tuple[int, int, int],
    seed: int,
    init: InitialLaw | None = None,
    config: SimulationConfig | None = None,
) -> QsdHistogram:
    """Histogram of the law at ``t_star`` conditioned on survival.

    ``naive`` keeps the independent particles still alive at ``t_star``.
    ``fleming_viot`` moves every absorbed particle onto the current state of
    a uniformly chosen other particle; its effective sample size is taken as
    ``N / (1 + 2 r/N)`` with ``r`` restarts.
    """

    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if N < MIN_QSD_PARTICLES:
        raise ValueError(f"QSD estimates need N >= {MIN_QSD_PARTICLES}, got {N}")
    if t_star < 0:
        raise ValueError("t_star must be non-negative")
    if len(bins) != 3 or min(bins) < 1:
        raise ValueError("bins must be three positive counts (x, y, direction)")
    init = init or InitialLaw()
    if mode == "naive":
        outcome = simulate_cloud(spec, init, N, t_star, seed, config)
        alive = np.isinf(outcome.absorption)
        survivors = int(alive.sum())
        if survivors == 0:
            raise HorizonTooDeepError(f"t_star too deep: no particle out of {N} survives to t={t_star}")
        x, u = outcome.x[alive], outcome.u[alive]
        effective, survival = float(survivors), survivors / N
    else:
        x, u, restarts = _fleming_viot(spec, init, N, t_star, seed)
        effective = N / (1 + 2 * restarts / N)
        survival = math.exp(restarts * math.log1p(-1.0 / N))
        logger.debug("fleming-viot cloud restarted %d times before t=%g", restarts, t_star)
    edges_x, edges_y, edges_angle, counts = _histogram(spec, x, u, bins)
    return QsdHistogram(
        edges_x=edges_x,
        edges_y=edges_y,
        edges_angle=edges_angle,
        mass=counts / counts.sum(),
        effective_sample_size=effective,
        n_particles=N,
        mode=mode,
        survival_estimate=survival,
    )


@dataclass(frozen=True, eq=False)
class HistogramComparison:
    tv: float
    z_scores: np.ndarray

    @property
    def max_z(self) -> float:
        return float(np.max(np.abs(self.z_scores)))


def compare_histograms(first: QsdHistogram, second: QsdHistogram, floor: Optional[float] = None) -> HistogramComparison:
    """Total variation (``Σ|p - q|``) and per-cell z-scores from the effective sizes."""

    if first.mass.shape != second.mass.shape:
        raise ValueError("histograms must share the same cells")
    pooled = (first.mass + second.mass) / 2
    variance = pooled * (1 - pooled) * (1 / first.effective_sample_size + 1 / second.effective_sample_size)
    floor = floor if floor is not None else 1.0 / (first.effective_sample_size + second.effective_sample_size) ** 2
    z = (first.mass - second.mass) / np.sqrt(np.maximum(variance, floor))
    return HistogramComparison(tv=tv_distance(first.mass.ravel(), second.mass.ravel()), z_scores=z)
