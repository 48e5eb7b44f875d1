"""Explicit deep-set parameters for a disk.

For a disk of radius ``R`` the deep set is the concentric disk of radius
``R - ε``.  From any point of the boundary shell, directions within
``θ = arcsin((R - ε)/R) / 2`` of the inward radius cross the deep set; the
travel times ``[s_ε, t_ε]`` spent inside it are bounded uniformly by
elementary geometry.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict

import numpy as np

logger = logging.getLogger(__name__)

SHELL_SAMPLES = 1_000
CONE_DIRECTIONS = 9
TIME_SAMPLES = 64
RADIUS_GRID = 2_001


@dataclass(frozen=True)
class AssumptionBParams:
    epsilon: float
    s_eps: float
    t_eps: float
    sigma_lower: float
    half_angle: float
    deep_radius: float
    verified: bool

    def __post_init__(self) -> None:
        if not 0 < self.s_eps < self.t_eps:
            raise ValueError("need 0 < s_eps < t_eps")
        if not 0 < self.sigma_lower <= 1:
            raise ValueError("sigma_lower must lie in (0, 1]")
        if self.deep_radius <= 0:
            raise ValueError("the deep set is empty")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _entry_exit(rho: np.ndarray, cos_phi: np.ndarray, deep_radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Times at which the ray from radius ``rho`` enters and leaves the deep disk."""

    sin_sq = 1.0 - cos_phi**2
    root = np.sqrt(deep_radius**2 - rho**2 * sin_sq)
    return rho * cos_phi - root, rho * cos_phi + root


def _verify(radius: float, params: AssumptionBParams, seed: int) -> bool:
    rng = np.random.default_rng(seed)
    rho = radius - params.epsilon * (1.0 - rng.random(SHELL_SAMPLES))
    position_angle = rng.uniform(0.0, 2 * math.pi, SHELL_SAMPLES)
    points = rho[:, None] * np.column_stack([np.cos(position_angle), np.sin(position_angle)])
    inward = -points / rho[:, None]
    inside_times = np.linspace(params.s_eps, params.t_eps, TIME_SAMPLES)
    approach_times = np.linspace(0.0, params.s_eps, TIME_SAMPLES // 4)
    for phi in np.linspace(-params.half_angle, params.half_angle, CONE_DIRECTIONS):
        c, s = math.cos(phi), math.sin(phi)
        direction = np.column_stack([c * inward[:, 0] - s * inward[:, 1], s * inward[:, 0] + c * inward[:, 1]])
        deep = points[:, None, :] + inside_times[None, :, None] * direction[:, None, :]
        if np.any(np.hypot(deep[..., 0], deep[..., 1]) >= params.deep_radius):
            return False
        approach = points[:, None, :] + approach_times[None, :, None] * direction[:, None, :]
        if np.any(np.hypot(approach[..., 0], approach[..., 1]) >= radius):
            return False
    return True


def disk_assumption_b_params(radius: float, epsilon: float, *, seed: int = 0) -> AssumptionBParams:
    """Parameters for the disk of ``radius`` centred at the origin, checked by sampling."""

    if not radius > 0:
        raise ValueError("radius must be positive")
    if not 0 < epsilon < radius / 2:
        raise ValueError(f"epsilon must lie in (0, radius/2), got {epsilon}")
    deep_radius = radius - epsilon
    half_angle = 0.5 * math.asin(deep_radius / radius)
    cos_theta = math.cos(half_angle)
    # Worst direction is the cone edge; entry is latest from the outer rim.
    latest_entry, _ = _entry_exit(np.array([radius]), np.array([cos_theta]), deep_radius)
    rho = np.linspace(deep_radius, radius, RADIUS_GRID)
    _, exits = _entry_exit(rho, np.full_like(rho, cos_theta), deep_radius)
    s_eps = float(latest_entry[0]) + 1e-9 * radius
    t_eps = float(exits.min()) - 1e-6 * radius
    params = AssumptionBParams(
        epsilon=float(epsilon),
        s_eps=s_eps,
        t_eps=t_eps,
        sigma_lower=half_angle / math.pi,
        half_angle=half_angle,
        deep_radius=deep_radius,
        verified=False,
    )
    verified = _verify(radius, params, seed)
    if not verified:
        logger.warning("sampled shell points violate the deep-set crossing for epsilon=%g", epsilon)
    return replace(params, verified=verified)
