"""Chain conditioned to never be absorbed (Doob transform by η)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from ..chain.generator import AbsorbedGenerator, DistributionVector
from ..chain.semigroup import Measure, as_weights, transition_matrix
from .triple import SpectralTriple


@dataclass(frozen=True, eq=False)
class QProcess:
    """Conservative generator ``L̃`` on ``E`` and its invariant law ``β = ηα``."""

    generator: np.ndarray
    beta: DistributionVector

    def __post_init__(self) -> None:
        generator = np.array(self.generator, dtype=float)
        generator.setflags(write=False)
        object.__setattr__(self, "generator", generator)

    def invariance_residual(self) -> float:
        return float(np.abs(self.beta.weights @ self.generator).sum())

    def to_dict(self) -> Dict[str, Any]:
        return {"generator": self.generator.tolist(), "beta": self.beta.weights.tolist()}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "QProcess":
        return cls(
            generator=np.array(payload["generator"], dtype=float),
            beta=DistributionVector(np.array(payload["beta"], dtype=float)),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QProcess):
            return NotImplemented
        return bool(np.array_equal(self.generator, other.generator)) and self.beta == other.beta

    __hash__ = None  # type: ignore[assignment]


def _positive_eta(triple: SpectralTriple) -> np.ndarray:
    eta = triple.eta
    if np.any(eta <= 0):
        raise ValueError("η must be positive on every state to build the Q-process")
    return eta


def qprocess_generator(gen: AbsorbedGenerator, triple: SpectralTriple) -> QProcess:
    """``L̃(x,y) = L(x,y)η(y)/η(x)`` off the diagonal, ``λ₀ + L(x,x)`` on it."""

    eta = _positive_eta(triple)
    matrix = gen.dense_matrix()
    generator = matrix * eta[None, :] / eta[:, None]
    generator[np.diag_indices(gen.n)] = triple.lambda0 + np.diag(matrix)
    beta = DistributionVector.from_weights(eta * triple.alpha.weights)
    return QProcess(generator=generator, beta=beta)


def qprocess_transition(gen: AbsorbedGenerator, triple: SpectralTriple, t: float) -> np.ndarray:
    """``p̃(x;t,y) = e^{λ₀t} η(y)/η(x) p(x;t,y)``."""

    eta = _positive_eta(triple)
    kernel = transition_matrix(gen, t)
    return math.exp(triple.lambda0 * t) * kernel * eta[None, :] / eta[:, None]


def qprocess_law(
    gen: AbsorbedGenerator, triple: SpectralTriple, mu: Measure, t: float
) -> DistributionVector:
    """Law at time ``t`` of the Q-process started from ``mu``."""

    weights = as_weights(mu)
    moved = weights @ qprocess_transition(gen, triple, t)
    return DistributionVector.from_weights(np.clip(moved, 0.0, None))


def apply_qprocess_generator(
    gen: AbsorbedGenerator, triple: SpectralTriple, f: np.ndarray
) -> np.ndarray:
    """Weak-generator form ``λ₀f + L(ηf)/η`` applied to a function on ``E``."""

    eta = _positive_eta(triple)
    f = np.asarray(f, dtype=float)
    return triple.lambda0 * f + (gen.matrix() @ (eta * f)) / eta


def generator_identity_residual(gen: AbsorbedGenerator, triple: SpectralTriple, qprocess: QProcess) -> float:
    """Entrywise distance between ``L̃`` and ``λ₀I + D_η⁻¹ L D_η``."""

    eta = _positive_eta(triple)
    conjugated = np.diag(1.0 / eta) @ gen.dense_matrix() @ np.diag(eta)
    expected = triple.lambda0 * np.eye(gen.n) + conjugated
    return float(np.abs(qprocess.generator - expected).max())
