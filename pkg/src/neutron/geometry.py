"""Convex planar domains with closed-form ray exits."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, Tuple, Union

import numpy as np

Box = Tuple[float, float, float, float]


def _as_points(points: np.ndarray) -> np.ndarray:
    array = np.asarray(points, dtype=float)
    return array.reshape(-1, 2) if array.ndim == 1 else array


@dataclass(frozen=True)
class Disk:
    center: Tuple[float, float]
    radius: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError("disk radius must be positive")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def bounding_box(self) -> Box:
        cx, cy = self.center
        r = self.radius
        return cx - r, cx + r, cy - r, cy + r

    @property
    def diameter(self) -> float:
        return 2 * self.radius

    @property
    def area(self) -> float:
        return math.pi * self.radius**2

    def distance_to_boundary(self, points: np.ndarray) -> np.ndarray:
        """Signed distance, positive inside."""

        p = _as_points(points) - np.asarray(self.center)
        return self.radius - np.hypot(p[:, 0], p[:, 1])

    def contains(self, points: np.ndarray) -> np.ndarray:
        return self.distance_to_boundary(points) > 0

    def exit_time(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Distance travelled along each unit ray before leaving the disk."""

        p = _as_points(x) - np.asarray(self.center)
        v = _as_points(u)
        b = np.einsum("ij,ij->i", p, v)
        c = np.einsum("ij,ij->i", p, p) - self.radius**2
        disc = np.sqrt(np.maximum(b * b - c, 0.0))
        # Two algebraically equal roots; pick the one without cancellation.
        with np.errstate(divide="ignore", invalid="ignore"):
            forward = np.where(b <= 0, disc - b, -c / (b + disc))
        return np.maximum(forward, 0.0)

    def exit_time_scalar(self, px: float, py: float, ux: float, uy: float) -> float:
        qx, qy = px - self.center[0], py - self.center[1]
        b = qx * ux + qy * uy
        c = qx * qx + qy * qy - self.radius * self.radius
        disc = math.sqrt(max(b * b - c, 0.0))
        if b <= 0:
            return max(disc - b, 0.0)
        denominator = b + disc
        return max(-c / denominator, 0.0) if denominator > 0 else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {"disk": {"center": list(self.center), "radius": self.radius}}


@dataclass(frozen=True)
class ConvexPolygon:
    """Strictly convex polygon; vertices are stored counter-clockwise."""

    vertices: Tuple[Tuple[float, float], ...]

    def __post_init__(self) -> None:
        points = np.asarray(self.vertices, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] < 3:
            raise ValueError("a polygon needs at least 3 vertices in the plane")
        signed_area = 0.5 * np.sum(points[:, 0] * np.roll(points[:, 1], -1) - np.roll(points[:, 0], -1) * points[:, 1])
        if signed_area < 0:
            points = points[::-1]
        edges = np.roll(points, -1, axis=0) - points
        turns = edges[:, 0] * np.roll(edges[:, 1], -1) - edges[:, 1] * np.roll(edges[:, 0], -1)
        if np.any(turns <= 0):
            raise ValueError("polygon must be strictly convex")
        angles = np.arctan2(turns, np.einsum("ij,ij->i", edges, np.roll(edges, -1, axis=0)))
        if not math.isclose(float(angles.sum()), 2 * math.pi, rel_tol=1e-9):
            raise ValueError("polygon must be simple (it winds more than once)")
        object.__setattr__(self, "vertices", tuple((float(x), float(y)) for x, y in points))
        lengths = np.hypot(edges[:, 0], edges[:, 1])
        normals = np.column_stack([edges[:, 1], -edges[:, 0]]) / lengths[:, None]
        object.__setattr__(self, "_normals", normals)
        object.__setattr__(self, "_offsets", np.einsum("ij,ij->i", normals, points))

    @property
    def bounding_box(self) -> Box:
        points = np.asarray(self.vertices)
        return float(points[:, 0].min()), float(points[:, 0].max()), float(points[:, 1].min()), float(points[:, 1].max())

    @property
    def diameter(self) -> float:
        points = np.asarray(self.vertices)
        deltas = points[:, None, :] - points[None, :, :]
        return float(np.hypot(deltas[..., 0], deltas[..., 1]).max())

    @property
    def area(self) -> float:
        points = np.asarray(self.vertices)
        return float(0.5 * np.sum(points[:, 0] * np.roll(points[:, 1], -1) - np.roll(points[:, 0], -1) * points[:, 1]))

    def distance_to_boundary(self, points: np.ndarray) -> np.ndarray:
        """Signed distance to the closest edge line, positive inside."""

        slack = self._offsets[None, :] - _as_points(points) @ self._normals.T
        return slack.min(axis=1)

    def contains(self, points: np.ndarray) -> np.ndarray:
        return self.distance_to_boundary(points) > 0

    def exit_time(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        slack = self._offsets[None, :] - _as_points(x) @ self._normals.T
        speed = _as_points(u) @ self._normals.T
        with np.errstate(divide="ignore", invalid="ignore"):
            times = np.where(speed > 0, slack / speed, np.inf)
        return np.maximum(times.min(axis=1), 0.0)

    def exit_time_scalar(self, px: float, py: float, ux: float, uy: float) -> float:
        best = math.inf
        for (nx, ny), offset in zip(self._normals.tolist(), self._offsets.tolist()):
            speed = nx * ux + ny * uy
            if speed > 0:
                best = min(best, (offset - nx * px - ny * py) / speed)
        return max(best, 0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {"polygon": [list(vertex) for vertex in self.vertices]}


Domain = Union[Disk, ConvexPolygon]


def domain_from_dict(payload: Dict[str, Any]) -> Domain:
    if "disk" in payload:
        disk = payload["disk"]
        return Disk(center=tuple(disk.get("center", (0.0, 0.0))), radius=float(disk["radius"]))
    if "polygon" in payload:
        return ConvexPolygon(vertices=tuple(tuple(vertex) for vertex in payload["polygon"]))
    raise ValueError("domain must be {'disk': {...}} or {'polygon': [...]}")


def sample_uniform(domain: Domain, rng: np.random.Generator, count: int) -> np.ndarray:
    """Uniform points in the domain by rejection from the bounding box."""

    xmin, xmax, ymin, ymax = domain.bounding_box
    accepted = np.empty((0, 2))
    while accepted.shape[0] < count:
        batch = max(2 * (count - accepted.shape[0]), 64)
        candidates = np.column_stack([rng.uniform(xmin, xmax, batch), rng.uniform(ymin, ymax, batch)])
        accepted = np.vstack([accepted, candidates[domain.contains(candidates)]])
    return accepted[:count]
