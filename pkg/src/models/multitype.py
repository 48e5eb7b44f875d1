"""Multi-type birth-death chains and their one-dimensional domination.

Two families are supported:

* ``mutation``: births with mutation and logistic competition,
  ``b^i(x) = Σ_j λ_{ji} x_j`` and ``d^i(x) = μ_i x_i + Σ_j c_{ij} x_i x_j``;
  the chain is absorbed when the whole population dies out.
* ``cooperative``: ``b^i(x) = λ_i x_i + Σ_{j≠i} c_{ij} x_i x_j`` and
  ``d^i(x) = μ_i x_i + c_{ii} x_i²``; the chain is absorbed as soon as one
  type dies out.

Live states are enumerated lexicographically with every coordinate capped;
births beyond the cap are dropped.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np

from ..chain.generator import AbsorbedGenerator
from ..errors import TruncationBudgetError
from .birth_death import BDSpec
from .rates import RateSequence

logger = logging.getLogger(__name__)

DEFAULT_STATE_BUDGET = 200_000
MODES = ("mutation", "cooperative")


@dataclass(frozen=True, eq=False)
class MultiBDSpec:
    """Rates of a ``d``-type chain; ``lam`` is d×d in mutation mode, length d otherwise."""

    d: int
    lam: np.ndarray
    mu: np.ndarray
    c: np.ndarray
    mode: str
    cap: int
    budget: int = DEFAULT_STATE_BUDGET

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.d < 1 or self.cap < 1:
            raise ValueError("need d >= 1 types and cap >= 1")
        lam = np.array(self.lam, dtype=float)
        mu = np.array(self.mu, dtype=float).reshape(-1)
        c = np.array(self.c, dtype=float).reshape(self.d, self.d)
        expected = (self.d, self.d) if self.mode == "mutation" else (self.d,)
        lam = lam.reshape(expected)
        if mu.shape != (self.d,):
            raise ValueError(f"mu must have {self.d} entries")
        if self.mode == "mutation":
            if np.any(lam <= 0) or np.any(mu <= 0) or np.any(c <= 0):
                raise ValueError("mutation mode needs positive lambda, mu and c")
        else:
            off_diagonal = c[~np.eye(self.d, dtype=bool)]
            if np.any(np.diag(c) <= 0) or np.any(off_diagonal < 0):
                raise ValueError("cooperative mode needs c_ii > 0 and c_ij >= 0")
            if np.any(lam < 0) or np.any(mu < 0):
                raise ValueError("cooperative mode needs non-negative lambda and mu")
        for name, value in (("lam", lam), ("mu", mu), ("c", c)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def state_count(self) -> int:
        if self.mode == "mutation":
            return (self.cap + 1) ** self.d - 1
        return self.cap**self.d

    def birth_rates(self, states: np.ndarray) -> np.ndarray:
        """``b^i(x)`` for every row of ``states`` (shape S×d)."""

        x = np.asarray(states, dtype=float)
        if self.mode == "mutation":
            return x @ self.lam
        off_diagonal = self.c * (1.0 - np.eye(self.d))
        return x * self.lam + x * (x @ off_diagonal.T)

    def death_rates(self, states: np.ndarray) -> np.ndarray:
        x = np.asarray(states, dtype=float)
        if self.mode == "mutation":
            return x * self.mu + x * (x @ self.c.T)
        return x * self.mu + np.diag(self.c) * x * x

    def as_bd_spec(self) -> BDSpec:
        """The 1-D chain this spec reduces to when ``d = 1``."""

        if self.d != 1:
            raise ValueError("only single-type specs reduce to a birth-death chain")
        return BDSpec(
            b=RateSequence(lambda k: self.birth_rates(np.asarray(k)[:, None])[:, 0]),
            d=RateSequence(lambda k: self.death_rates(np.asarray(k)[:, None])[:, 0]),
            a=RateSequence(0.0),
            N=self.cap,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "lambda": self.lam.tolist(),
            "mu": self.mu.tolist(),
            "c": self.c.tolist(),
            "mode": self.mode,
            "cap": self.cap,
            "budget": self.budget,
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "MultiBDSpec":
        try:
            return cls(
                d=int(payload["d"]),
                lam=np.array(payload["lambda"], dtype=float),
                mu=np.array(payload["mu"], dtype=float),
                c=np.array(payload["c"], dtype=float),
                mode=payload["mode"],
                cap=int(payload["cap"]),
                budget=int(payload.get("budget", DEFAULT_STATE_BUDGET)),
            )
        except KeyError as exc:
            raise ValueError(f"multibd spec is missing field {exc.args[0]!r}") from exc


def enumerate_states(spec: MultiBDSpec) -> np.ndarray:
    """Live states in lexicographic order (shape S×d)."""

    if spec.state_count > spec.budget:
        raise TruncationBudgetError(spec.state_count, spec.budget)
    if spec.mode == "mutation":
        grid = np.indices((spec.cap + 1,) * spec.d).reshape(spec.d, -1).T
        return grid[1:]
    return np.indices((spec.cap,) * spec.d).reshape(spec.d, -1).T + 1


def _strides(spec: MultiBDSpec) -> np.ndarray:
    radix = spec.cap + 1 if spec.mode == "mutation" else spec.cap
    return radix ** np.arange(spec.d - 1, -1, -1)


def _build(spec: MultiBDSpec) -> AbsorbedGenerator:
    states = enumerate_states(spec)
    n = states.shape[0]
    strides = _strides(spec)
    offset = 0 if spec.mode == "mutation" else 1
    index = (states - offset) @ strides - (1 if spec.mode == "mutation" else 0)
    births = spec.birth_rates(states)
    deaths = spec.death_rates(states)
    kill = np.zeros(n)
    rows, cols, values = [], [], []
    population = states.sum(axis=1)
    for i in range(spec.d):
        grow = states[:, i] < spec.cap
        rows.append(index[grow])
        cols.append(index[grow] + strides[i])
        values.append(births[grow, i])
        if spec.mode == "mutation":
            absorbed = population == states[:, i]
            absorbed &= states[:, i] == 1
        else:
            absorbed = states[:, i] == 1
        shrink = ~absorbed & (states[:, i] > 0)
        rows.append(index[shrink])
        cols.append(index[shrink] - strides[i])
        values.append(deaths[shrink, i])
        np.add.at(kill, index[absorbed], deaths[absorbed, i])
    logger.debug("assembled %s chain with %d states", spec.mode, n)
    return AbsorbedGenerator.from_transitions(
        n, np.concatenate(rows), np.concatenate(cols), np.concatenate(values), kill
    )


def build_multibd_mutation(spec: MultiBDSpec) -> AbsorbedGenerator:
    if spec.mode != "mutation":
        raise ValueError("build_multibd_mutation needs mode='mutation'")
    return _build(spec)


def build_multibd_cooperative(spec: MultiBDSpec) -> AbsorbedGenerator:
    if spec.mode != "cooperative":
        raise ValueError("build_multibd_cooperative needs mode='cooperative'")
    return _build(spec)


def build_multibd(spec: MultiBDSpec) -> AbsorbedGenerator:
    return build_multibd_mutation(spec) if spec.mode == "mutation" else build_multibd_cooperative(spec)


@dataclass(frozen=True)
class WeakCooperation:
    holds: bool
    margin: float
    lhs: float
    inverse_beta: float


def check_weak_cooperation(spec: MultiBDSpec) -> WeakCooperation:
    """``(1 - 1/d) max_{i≠j} (c_ij + c_ji)/2 < 1/β`` with ``β = Σ_j 1/c_jj``."""

    if spec.mode != "cooperative":
        raise ValueError("weak cooperation is defined for cooperative specs")
    inverse_beta = 1.0 / float(np.sum(1.0 / np.diag(spec.c)))
    lhs = 0.0
    if spec.d > 1:
        symmetric = (spec.c + spec.c.T) / 2
        lhs = (1 - 1 / spec.d) * float(symmetric[~np.eye(spec.d, dtype=bool)].max())
    margin = inverse_beta - lhs
    return WeakCooperation(holds=margin > 0, margin=margin, lhs=lhs, inverse_beta=inverse_beta)


@dataclass(frozen=True)
class DominationRates:
    """One-dimensional ``(b_n, d_n)`` bounding the aggregate rates at ``|x| = n``.

    ``first_level`` is the smallest population of a live state; the series
    test on these rates starts there.
    """

    b: RateSequence
    d: RateSequence
    first_level: int

    def as_bd_spec(self, N: int) -> BDSpec:
        return BDSpec(b=self.b, d=self.d, a=RateSequence(0.0), N=N)


def domination_rates(spec: MultiBDSpec) -> DominationRates:
    if spec.mode == "mutation":
        birth = spec.d * float(spec.lam.max())
        death_linear = float(spec.mu.min())
        death_quadratic = float(spec.c.min())
        return DominationRates(
            b=RateSequence(lambda n: n * birth),
            d=RateSequence(lambda n: n * death_linear + n * n * death_quadratic),
            first_level=1,
        )
    cooperation = 0.0
    if spec.d > 1:
        upper = np.triu_indices(spec.d, k=1)
        cooperation = (1 - 1 / spec.d) * float((spec.c + spec.c.T)[upper].max()) / 2
    linear = float(spec.lam.max())
    death_linear = float(spec.mu.min())
    inverse_beta = check_weak_cooperation(spec).inverse_beta
    return DominationRates(
        b=RateSequence(lambda n: n * linear + n * n * cooperation),
        d=RateSequence(lambda n: n * death_linear + n * n * inverse_beta),
        first_level=spec.d,
    )


def aggregate_rates(spec: MultiBDSpec, states: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """``(Σ_i b^i(x), Σ_i d^i(x))`` per row of ``states``."""

    return spec.birth_rates(states).sum(axis=1), spec.death_rates(states).sum(axis=1)
