"""Birth-death chains with catastrophes, truncated at level ``N``.

From level ``k`` the chain moves to ``k+1`` at rate ``b_k`` (dropped at the
cap), to ``k-1`` at rate ``d_k`` and to ``∂ = 0`` at rate ``a_k``; from level 1
the death also lands in ``∂``, so the total kill there is ``a_1 + d_1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np

from ..chain.generator import AbsorbedGenerator
from .rates import RateSequence, as_rate


@dataclass(frozen=True)
class BDSpec:
    b: RateSequence
    d: RateSequence
    a: RateSequence = field(default_factory=lambda: RateSequence(0.0))
    N: int = 60

    def __post_init__(self) -> None:
        for name in ("b", "d", "a"):
            object.__setattr__(self, name, as_rate(getattr(self, name)))
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"truncation level N must be a positive integer, got {self.N}")
        levels = self.levels
        births, deaths, catastrophes = self.b(levels), self.d(levels), self.a(levels)
        if not np.all(np.isfinite(births)) or np.any(births <= 0):
            raise ValueError("birth rates must be finite and positive on 1..N")
        if not np.all(np.isfinite(deaths)) or np.any(deaths <= 0):
            raise ValueError("death rates must be finite and positive on 1..N")
        if not np.all(np.isfinite(catastrophes)) or np.any(catastrophes < 0):
            raise ValueError("catastrophe rates must be finite and non-negative on 1..N")

    @property
    def levels(self) -> np.ndarray:
        return np.arange(1, self.N + 1, dtype=float)

    def with_truncation(self, N: int) -> "BDSpec":
        return BDSpec(b=self.b, d=self.d, a=self.a, N=N)

    def to_dict(self) -> Dict[str, Any]:
        return {"b": self.b.to_json(), "d": self.d.to_json(), "a": self.a.to_json(), "N": self.N}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "BDSpec":
        try:
            return cls(b=payload["b"], d=payload["d"], a=payload.get("a", 0.0), N=int(payload["N"]))
        except KeyError as exc:
            raise ValueError(f"bd spec is missing field {exc.args[0]!r}") from exc


def build_bd(spec: BDSpec) -> AbsorbedGenerator:
    """Generator on ``{1..N}`` (state ``k`` at index ``k-1``)."""

    if spec.N < 1:
        raise ValueError("N must be at least 1")
    levels = spec.levels
    births, deaths, catastrophes = spec.b(levels), spec.d(levels), spec.a(levels)
    index = np.arange(spec.N)
    up = index[:-1]
    down = index[1:]
    rows = np.concatenate([up, down])
    cols = np.concatenate([up + 1, down - 1])
    values = np.concatenate([births[:-1], deaths[1:]])
    kill = catastrophes.copy()
    kill[0] = catastrophes[0] + deaths[0]
    return AbsorbedGenerator.from_transitions(spec.N, rows, cols, values, kill)


def max_absorption_rate(spec: BDSpec) -> float:
    """``q̄ = d_1 + sup_k a_k``; every state survives at least like ``e^{-q̄t}``."""

    return float(spec.d(np.array([1.0]))[0] + spec.a(spec.levels).max())
