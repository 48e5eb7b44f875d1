"""Straight-line transport with uniform direction renewals, killed at the boundary.

A particle moves at unit speed along its direction ``u``.  At the times of a
Poisson clock of rate ``λ`` the direction is redrawn uniformly on the unit
circle; the first time the ray leaves the domain the particle is absorbed.

Many particles are simulated in fixed blocks.  Block ``b`` always draws from
the Philox stream keyed by ``(seed, b)``, so the output does not depend on
the number of worker threads.  It does depend on ``block_size``: particle
``i`` belongs to block ``i // block_size``, and a run is reproduced by the
pair ``(seed, block_size)``.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .geometry import Domain, domain_from_dict, sample_uniform

logger = logging.getLogger(__name__)

UNIT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SimulationConfig:
    """Parameters of the particle engine.

    ``block_size`` is part of the reproducibility key together with the seed;
    ``threads`` only changes the speed.
    """

    block_size: int = 4096
    threads: int = 1

    def __post_init__(self) -> None:
        if self.block_size < 1 or self.threads < 1:
            raise ValueError("block_size and threads must be positive")


@dataclass(frozen=True)
class NeutronSpec:
    domain: Domain
    lambda_jump: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lambda_jump) and self.lambda_jump > 0):
            raise ValueError("jump rate lambda must be positive and finite")

    def to_dict(self) -> Dict[str, Any]:
        return {"domain": self.domain.to_dict(), "lambda": self.lambda_jump}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "NeutronSpec":
        try:
            return cls(domain=domain_from_dict(payload["domain"]), lambda_jump=float(payload["lambda"]))
        except KeyError as exc:
            raise ValueError(f"neutron spec is missing field {exc.args[0]!r}") from exc


def _unit(u: Tuple[float, float]) -> Tuple[float, float]:
    ux, uy = float(u[0]), float(u[1])
    if abs(math.hypot(ux, uy) - 1.0) > UNIT_TOLERANCE:
        raise ValueError(f"direction {u} is not a unit vector")
    return ux, uy


@dataclass(frozen=True)
class PdmpState:
    x: Tuple[float, float]
    u: Tuple[float, float]
    alive: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", (float(self.x[0]), float(self.x[1])))
        object.__setattr__(self, "u", _unit(self.u))

    def check_inside(self, domain: Domain) -> None:
        if self.alive and not bool(domain.contains(np.asarray(self.x))[0]):
            raise ValueError(f"live particle at {self.x} is outside the domain")


def exit_time(spec: NeutronSpec, x: Tuple[float, float], u: Tuple[float, float]) -> float:
    """Distance to the boundary along ``u``; the start must lie inside the domain."""

    state = PdmpState(x=x, u=u)
    state.check_inside(spec.domain)
    return spec.domain.exit_time_scalar(*state.x, *state.u)


@dataclass(frozen=True, eq=False)
class PathRecord:
    """Jump times with the position and new direction after each jump.

    Row 0 of ``positions``/``directions`` is the starting state.
    """

    jump_times: np.ndarray
    positions: np.ndarray
    directions: np.ndarray
    horizon: float
    absorption_time: Optional[float] = None

    @property
    def survived(self) -> bool:
        return self.absorption_time is None

    def state_at(self, t: float) -> PdmpState:
        if not 0 <= t <= self.horizon:
            raise ValueError(f"t={t} outside [0, {self.horizon}]")
        if self.absorption_time is not None and t >= self.absorption_time:
            last = int(np.searchsorted(self.jump_times, self.absorption_time, side="right"))
            position = self.positions[last] + (self.absorption_time - self._start(last)) * self.directions[last]
            return PdmpState(x=tuple(position), u=tuple(self.directions[last]), alive=False)
        k = int(np.searchsorted(self.jump_times, t, side="right"))
        position = self.positions[k] + (t - self._start(k)) * self.directions[k]
        return PdmpState(x=tuple(position), u=tuple(self.directions[k]))

    def _start(self, k: int) -> float:
        return 0.0 if k == 0 else float(self.jump_times[k - 1])


def random_directions(rng: np.random.Generator, count: int) -> np.ndarray:
    angles = rng.uniform(0.0, 2 * math.pi, count)
    return np.column_stack([np.cos(angles), np.sin(angles)])


def simulate_path(
    spec: NeutronSpec,
    x0: Tuple[float, float],
    u0: Tuple[float, float],
    horizon: float,
    rng: np.random.Generator,
) -> PathRecord:
    """One trajectory up to ``horizon`` or its absorption, whichever comes first."""

    if not horizon > 0:
        raise ValueError("horizon must be positive")
    start = PdmpState(x=x0, u=u0)
    start.check_inside(spec.domain)
    px, py = start.x
    ux, uy = start.u
    t = 0.0
    times: List[float] = []
    positions = [(px, py)]
    directions = [(ux, uy)]
    absorbed: Optional[float] = None
    while True:
        flight = rng.exponential(1.0 / spec.lambda_jump)
        to_wall = spec.domain.exit_time_scalar(px, py, ux, uy)
        if to_wall <= flight and t + to_wall <= horizon:
            absorbed = t + to_wall
            break
        if t + flight >= horizon:
            break
        t += flight
        px, py = px + flight * ux, py + flight * uy
        angle = rng.uniform(0.0, 2 * math.pi)
        ux, uy = math.cos(angle), math.sin(angle)
        times.append(t)
        positions.append((px, py))
        directions.append((ux, uy))
    return PathRecord(
        jump_times=np.asarray(times, dtype=float),
        positions=np.asarray(positions, dtype=float),
        directions=np.asarray(directions, dtype=float),
        horizon=float(horizon),
        absorption_time=absorbed,
    )


@dataclass(frozen=True)
class InitialLaw:
    """Starting law: a point or the uniform law on the domain, with a fixed or uniform direction."""

    kind: str = "uniform"
    point: Optional[Tuple[float, float]] = None
    direction: Optional[Tuple[float, float]] = None

    def __post_init__(self) -> None:
        if self.kind not in ("dirac", "uniform"):
            raise ValueError("initial law kind must be 'dirac' or 'uniform'")
        if self.kind == "dirac" and self.point is None:
            raise ValueError("a dirac initial law needs a point")
        if self.direction is not None:
            object.__setattr__(self, "direction", _unit(self.direction))

    def sample(self, domain: Domain, rng: np.random.Generator, count: int) -> Tuple[np.ndarray, np.ndarray]:
        if self.kind == "dirac":
            x = np.tile(np.asarray(self.point, dtype=float), (count, 1))
            if not np.all(domain.contains(x[:1])):
                raise ValueError(f"initial point {self.point} is outside the domain")
        else:
            x = sample_uniform(domain, rng, count)
        if self.direction is None:
            u = random_directions(rng, count)
        else:
            u = np.tile(np.asarray(self.direction), (count, 1))
        return x, u

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"kind": self.kind}
        if self.point is not None:
            payload["point"] = list(self.point)
        if self.direction is not None:
            payload["direction"] = list(self.direction)
        return payload

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "InitialLaw":
        point = payload.get("point")
        direction = payload.get("direction")
        return cls(
            kind=payload.get("kind", "uniform"),
            point=tuple(point) if point is not None else None,
            direction=tuple(direction) if direction is not None else None,
        )


def block_stream(seed: int, block: int) -> np.random.Generator:
    """Counter-based stream owned by one particle block."""

    key = np.array([seed, block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True, eq=False)
class BlockOutcome:
    """Absorption times (``inf`` for survivors) and the final states of a block."""

    absorption: np.ndarray
    x: np.ndarray
    u: np.ndarray


def run_block(spec: NeutronSpec, x: np.ndarray, u: np.ndarray, t_end: float, rng: np.random.Generator) -> BlockOutcome:
    """Advance every particle of a block up to ``t_end`` (vectorised)."""

    x = np.array(x, dtype=float)
    u = np.array(u, dtype=float)
    count = x.shape[0]
    clock = np.zeros(count)
    absorption = np.full(count, np.inf)
    active = np.arange(count)
    while active.size:
        flight = rng.exponential(1.0 / spec.lambda_jump, active.size)
        to_wall = spec.domain.exit_time(x[active], u[active])
        dies = (to_wall <= flight) & (clock[active] + to_wall <= t_end)
        absorption[active[dies]] = clock[active[dies]] + to_wall[dies]
        x[active[dies]] += to_wall[dies, None] * u[active[dies]]
        survivors = ~dies
        finishing = survivors & (clock[active] + flight >= t_end)
        done = active[finishing]
        x[done] += (t_end - clock[done])[:, None] * u[done]
        clock[done] = t_end
        jumping = survivors & ~finishing
        movers = active[jumping]
        x[movers] += flight[jumping, None] * u[movers]
        clock[movers] += flight[jumping]
        u[movers] = random_directions(rng, movers.size)
        active = movers
    return BlockOutcome(absorption=absorption, x=x, u=u)


def _block_sizes(n_particles: int, block_size: int) -> List[int]:
    full, rest = divmod(n_particles, block_size)
    return [block_size] * full + ([rest] if rest else [])


def simulate_cloud(
    spec: NeutronSpec,
    init: InitialLaw,
    n_particles: int,
    t_end: float,
    seed: int,
    config: SimulationConfig | None = None,
) -> BlockOutcome:
    """Independent particles up to ``t_end``, concatenated in block order."""

    config = config or SimulationConfig()
    if n_particles < 1:
        raise ValueError("need at least one particle")
    sizes = _block_sizes(n_particles, config.block_size)

    def work(block: int) -> BlockOutcome:
        rng = block_stream(seed, block)
        x, u = init.sample(spec.domain, rng, sizes[block])
        return run_block(spec, x, u, t_end, rng)

    logger.debug("simulating %d particles in %d blocks on %d threads", n_particles, len(sizes), config.threads)
    if config.threads == 1:
        outcomes = [work(block) for block in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            outcomes = list(pool.map(work, range(len(sizes))))
    return BlockOutcome(
        absorption=np.concatenate([outcome.absorption for outcome in outcomes]),
        x=np.vstack([outcome.x for outcome in outcomes]),
        u=np.vstack([outcome.u for outcome in outcomes]),
    )
