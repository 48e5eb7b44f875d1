"""Monte Carlo check of the two-jump lower bound on the transport density.

Started at ``(x, u)`` far enough from the boundary, the law of ``(X_t, V_t)``
dominates

    λ² e^{-λt} / (4π t) · (t - r)² / (t + r) · 1{r < t},   r = |z - x|,

per unit area and per unit of the uniform direction probability.  The
square ``[x - t, x + t]²`` is cut into cells, the circle into equal arcs,
and every cell × arc compares the empirical probability with the integral
of the bound.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .geometry import Disk
from .transport import InitialLaw, NeutronSpec, SimulationConfig, simulate_cloud

logger = logging.getLogger(__name__)

QUADRATURE_POINTS = 32
SIGMAS = 3.0


def transport_density_lower_bound(lambda_jump: float, t: float, r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    scale = lambda_jump**2 * math.exp(-lambda_jump * t) / (4 * math.pi * t)
    inside = r < t
    return np.where(inside, scale * np.square(t - r) / (t + r), 0.0)


def _cell_integral(lambda_jump: float, t: float, center: np.ndarray, x_edges: Tuple[float, float], y_edges: Tuple[float, float], points: int) -> float:
    hx = (x_edges[1] - x_edges[0]) / points
    hy = (y_edges[1] - y_edges[0]) / points
    gx = x_edges[0] + hx * (np.arange(points) + 0.5)
    gy = y_edges[0] + hy * (np.arange(points) + 0.5)
    zx, zy = np.meshgrid(gx, gy, indexing="ij")
    r = np.hypot(zx - center[0], zy - center[1])
    return float(transport_density_lower_bound(lambda_jump, t, r).sum() * hx * hy)


@dataclass(frozen=True)
class BoundCell:
    ix: int
    iy: int
    arc: int
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    a_lo: float
    a_hi: float
    empirical: float
    rhs: float
    margin: float
    passed: bool


@dataclass(frozen=True)
class DensityBoundTable:
    cells: Tuple[BoundCell, ...]
    n_particles: int

    @property
    def pass_fraction(self) -> float:
        return sum(cell.passed for cell in self.cells) / len(self.cells)

    @property
    def failures(self) -> List[BoundCell]:
        return [cell for cell in self.cells if not cell.passed]


def verify_transport_density_bound(
    spec: NeutronSpec,
    x: Tuple[float, float],
    t: float,
    N: int,
    seed: int,
    *,
    cells: Tuple[int, int] = (8, 8),
    arcs: int = 8,
    direction: Tuple[float, float] = (1.0, 0.0),
    quadrature: int = QUADRATURE_POINTS,
    config: SimulationConfig | None = None,
) -> DensityBoundTable:
    """Per-cell PASS/FAIL table; a cell passes when ``p̂ + 3σ ≥ RHS``.

    ``σ`` is the binomial standard error at ``max(p̂, RHS)`` so that an empty
    cell under a positive bound is not passed by a zero error bar.
    """

    if not isinstance(spec.domain, Disk):
        raise ValueError("the density bound check is implemented for disks")
    if not t > 0:
        raise ValueError("t must be positive")
    center = np.asarray(x, dtype=float)
    distance = float(spec.domain.distance_to_boundary(center)[0])
    if distance <= t:
        raise ValueError(f"d(x, boundary) = {distance:.6g} must exceed t = {t}")
    outcome = simulate_cloud(spec, InitialLaw(kind="dirac", point=tuple(center), direction=direction), N, t, seed, config)
    if not np.all(np.isinf(outcome.absorption)):
        raise RuntimeError("a particle reached the boundary before t despite d(x, boundary) > t")
    x_edges = np.linspace(center[0] - t, center[0] + t, cells[0] + 1)
    y_edges = np.linspace(center[1] - t, center[1] + t, cells[1] + 1)
    a_edges = np.linspace(0.0, 2 * math.pi, arcs + 1)
    angles = np.mod(np.arctan2(outcome.u[:, 1], outcome.u[:, 0]), 2 * math.pi)
    counts, _ = np.histogramdd(np.column_stack([outcome.x, angles]), bins=[x_edges, y_edges, a_edges])
    rows: List[BoundCell] = []
    for ix in range(cells[0]):
        for iy in range(cells[1]):
            spatial = _cell_integral(spec.lambda_jump, t, center, (x_edges[ix], x_edges[ix + 1]), (y_edges[iy], y_edges[iy + 1]), quadrature)
            rhs = spatial / arcs
            for arc in range(arcs):
                empirical = counts[ix, iy, arc] / N
                reference = max(empirical, rhs)
                sigma = math.sqrt(reference * (1 - reference) / N)
                margin = empirical + SIGMAS * sigma - rhs
                rows.append(
                    BoundCell(
                        ix=ix, iy=iy, arc=arc,
                        x_lo=float(x_edges[ix]), x_hi=float(x_edges[ix + 1]),
                        y_lo=float(y_edges[iy]), y_hi=float(y_edges[iy + 1]),
                        a_lo=float(a_edges[arc]), a_hi=float(a_edges[arc + 1]),
                        empirical=float(empirical), rhs=rhs, margin=margin, passed=margin >= 0,
                    )
                )
    table = DensityBoundTable(cells=tuple(rows), n_particles=N)
    logger.debug("density bound: %.4f of %d cells pass", table.pass_fraction, len(rows))
    return table
