"""Finite absorbed continuous-time Markov chains.

An :class:`AbsorbedGenerator` stores the off-diagonal jump rates between
live states and the per-state absorption (kill) rates towards the cemetery
state.  The diagonal of the generator is never stored: it is rebuilt as the
negated total outflow so that every row of the full generator, cemetery
column included, sums to zero.

Small chains keep a dense ``numpy`` matrix.  Chains above
:data:`DENSE_LIMIT` states are stored as ``scipy.sparse.csr_array`` so the
multi-type builders can assemble large truncations.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import breadth_first_order

from ..errors import InvalidGeneratorError

logger = logging.getLogger(__name__)

# Largest state count stored as a dense matrix.
DENSE_LIMIT = 512

RateMatrix = Union[np.ndarray, sparse.csr_array]


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class AbsorbedGenerator:
    """Sub-Markovian rate matrix on ``E`` plus kill rates towards ``∂``."""

    rates: RateMatrix
    kill: np.ndarray

    def __post_init__(self) -> None:
        if sparse.issparse(self.rates):
            rates = sparse.csr_array(self.rates, dtype=float)
            rates.sum_duplicates()
        else:
            rates = np.array(self.rates, dtype=float)
            if rates.ndim != 2:
                raise ValueError("rates must be a square matrix")
            _frozen(rates)
        if rates.shape[0] != rates.shape[1]:
            raise ValueError(f"rates must be square, got shape {rates.shape}")
        kill = _frozen(np.array(self.kill, dtype=float).reshape(-1))
        if kill.shape[0] != rates.shape[0]:
            raise ValueError(
                f"kill has {kill.shape[0]} entries for a {rates.shape[0]}-state chain"
            )
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "kill", kill)

    @property
    def n(self) -> int:
        return int(self.kill.shape[0])

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.rates)

    @property
    def outflow(self) -> np.ndarray:
        """Total jump rate out of each state, absorption included."""

        jump = np.asarray(self.rates.sum(axis=1)).reshape(-1)
        return jump + self.kill

    @property
    def uniformization_rate(self) -> float:
        return float(self.outflow.max()) if self.n else 0.0

    def matrix(self) -> RateMatrix:
        """Generator ``L`` restricted to ``E`` (diagonal = -outflow)."""

        if self.is_sparse:
            return (self.rates - sparse.diags_array(self.outflow)).tocsr()
        return self.rates - np.diag(self.outflow)

    def dense_matrix(self) -> np.ndarray:
        matrix = self.matrix()
        return matrix.toarray() if sparse.issparse(matrix) else np.array(matrix)

    def full_matrix(self) -> np.ndarray:
        """Dense generator on ``E ∪ {∂}``; the cemetery is the last index."""

        n = self.n
        full = np.zeros((n + 1, n + 1))
        full[:n, :n] = self.dense_matrix()
        full[:n, n] = self.kill
        return full

    def row_sums(self) -> np.ndarray:
        """Row sums of the full generator, computed the way the diagonal is."""

        jump = np.asarray(self.rates.sum(axis=1)).reshape(-1)
        return (jump + self.kill) - self.outflow

    @classmethod
    def from_transitions(
        cls,
        n: int,
        rows: np.ndarray,
        cols: np.ndarray,
        values: np.ndarray,
        kill: np.ndarray,
    ) -> "AbsorbedGenerator":
        """Assemble from a list of ``(row, col, rate)`` jumps; dense up to :data:`DENSE_LIMIT`."""

        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=float)
        if n <= DENSE_LIMIT:
            rates = np.zeros((n, n))
            np.add.at(rates, (rows, cols), values)
            return cls(rates=rates, kill=kill)
        keep = values != 0
        matrix = sparse.csr_array((values[keep], (rows[keep], cols[keep])), shape=(n, n))
        return cls(rates=matrix, kill=kill)

    def to_dict(self) -> Dict[str, Any]:
        if self.is_sparse:
            coo = self.rates.tocoo()
            rates: Any = {
                "row": coo.row.tolist(),
                "col": coo.col.tolist(),
                "val": coo.data.tolist(),
            }
        else:
            rates = self.rates.tolist()
        return {"n": self.n, "rates": rates, "kill": self.kill.tolist()}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "AbsorbedGenerator":
        try:
            n = int(payload["n"])
            raw_rates = payload["rates"]
            kill = payload["kill"]
        except KeyError as exc:
            raise ValueError(f"generator object is missing field {exc.args[0]!r}") from exc
        if isinstance(raw_rates, dict):
            rates: RateMatrix = sparse.csr_array(
                (raw_rates["val"], (raw_rates["row"], raw_rates["col"])), shape=(n, n)
            )
        else:
            rates = np.array(raw_rates, dtype=float).reshape(n, n) if n else np.zeros((0, 0))
        return cls(rates=rates, kill=np.array(kill, dtype=float))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AbsorbedGenerator):
            return NotImplemented
        if self.n != other.n or self.is_sparse != other.is_sparse:
            return False
        if not np.array_equal(self.kill, other.kill):
            return False
        if self.is_sparse:
            return (self.rates != other.rates).nnz == 0
        return bool(np.array_equal(self.rates, other.rates))

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class DistributionVector:
    """Non-negative measure on ``E``; ``normalized`` asserts unit mass."""

    weights: np.ndarray
    normalized: bool = True

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if not np.all(np.isfinite(weights)):
            raise ValueError("distribution weights must be finite")
        if np.any(weights < 0):
            raise ValueError("distribution weights must be non-negative")
        if self.normalized and abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"normalized distribution has mass {weights.sum():.17g}")
        object.__setattr__(self, "weights", _frozen(weights))

    @classmethod
    def dirac(cls, n: int, state: int) -> "DistributionVector":
        if not 0 <= state < n:
            raise ValueError(f"state {state} outside 0..{n - 1}")
        weights = np.zeros(n)
        weights[state] = 1.0
        return cls(weights)

    @classmethod
    def uniform(cls, n: int) -> "DistributionVector":
        if n < 1:
            raise ValueError("uniform law needs at least one state")
        return cls(np.full(n, 1.0 / n), normalized=False).normalize()

    @classmethod
    def from_weights(cls, weights: np.ndarray) -> "DistributionVector":
        return cls(weights, normalized=False).normalize()

    @property
    def n(self) -> int:
        return int(self.weights.shape[0])

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def normalize(self) -> "DistributionVector":
        mass = self.mass
        if mass <= 0:
            raise ValueError("cannot normalize a zero measure")
        return DistributionVector(self.weights / mass, normalized=True)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DistributionVector):
            return NotImplemented
        return self.normalized == other.normalized and bool(
            np.array_equal(self.weights, other.weights)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class SurvivalCurve:
    """Survival probabilities on an increasing time grid.

    Monte Carlo curves also carry the confidence band and the raw survivor
    counts out of ``n_particles``; exact curves leave them empty.
    """

    times: np.ndarray
    values: np.ndarray
    ci_lo: np.ndarray | None = None
    ci_hi: np.ndarray | None = None
    survivors: np.ndarray | None = None
    n_particles: int | None = None

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=float).reshape(-1)
        values = np.array(self.values, dtype=float).reshape(-1)
        if times.shape != values.shape:
            raise ValueError("times and values must have the same length")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("survival times must be strictly increasing")
        if np.any(values < 0) or np.any(values > 1):
            raise ValueError("survival values must lie in [0, 1]")
        if values.size > 1 and np.any(np.diff(values) > 1e-12):
            raise ValueError("survival values must be non-increasing")
        object.__setattr__(self, "times", _frozen(times))
        object.__setattr__(self, "values", _frozen(values))
        for name in ("ci_lo", "ci_hi", "survivors"):
            extra = getattr(self, name)
            if extra is not None:
                extra = np.array(extra, dtype=float if name != "survivors" else np.int64)
                if extra.shape != times.shape:
                    raise ValueError(f"{name} must match the time grid")
                object.__setattr__(self, name, _frozen(extra))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SurvivalCurve):
            return NotImplemented

        def same(a: np.ndarray | None, b: np.ndarray | None) -> bool:
            if a is None or b is None:
                return a is b
            return bool(np.array_equal(a, b))

        return (
            same(self.times, other.times)
            and same(self.values, other.values)
            and same(self.ci_lo, other.ci_lo)
            and same(self.ci_hi, other.ci_hi)
            and same(self.survivors, other.survivors)
            and self.n_particles == other.n_particles
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class GeneratorIssue:
    row: int
    message: str


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate`."""

    n: int
    issues: Tuple[GeneratorIssue, ...] = field(default_factory=tuple)
    unreachable: Tuple[int, ...] = field(default_factory=tuple)

    @property
    def valid(self) -> bool:
        return not self.issues and not self.unreachable

    def messages(self) -> List[str]:
        lines = [f"row {issue.row}: {issue.message}" for issue in self.issues]
        lines.extend(f"row {state}: ∂ unreachable" for state in self.unreachable)
        return lines

    def raise_if_invalid(self) -> None:
        if self.issues:
            first = self.issues[0]
            raise InvalidGeneratorError(first.message, row=first.row)
        if self.unreachable:
            raise InvalidGeneratorError("∂ unreachable", row=self.unreachable[0])


def _absorbing_reach(gen: AbsorbedGenerator) -> np.ndarray:
    """Boolean mask of the states from which ``∂`` can be reached."""

    n = gen.n
    if gen.is_sparse:
        coo = gen.rates.tocoo()
        keep = coo.data > 0
        rows, cols = coo.row[keep], coo.col[keep]
    else:
        rows, cols = np.nonzero(gen.rates > 0)
    killing = np.flatnonzero(gen.kill > 0)
    # Reverse edges so a search from ∂ (index n) lists every state leading to it.
    src = np.concatenate([cols, np.full(killing.size, n)])
    dst = np.concatenate([rows, killing])
    graph = sparse.csr_array(
        (np.ones(src.size, dtype=np.int8), (src, dst)), shape=(n + 1, n + 1)
    )
    order = breadth_first_order(graph, i_start=n, directed=True, return_predecessors=False)
    reached = np.zeros(n + 1, dtype=bool)
    reached[order] = True
    return reached[:n]


def validate(gen: AbsorbedGenerator) -> ValidationReport:
    """Check every generator invariant and list the offending rows."""

    issues: List[GeneratorIssue] = []
    dense_rates = gen.rates.toarray() if gen.is_sparse and gen.n <= DENSE_LIMIT else None
    if gen.is_sparse and dense_rates is None:
        coo = gen.rates.tocoo()
        for row in np.unique(coo.row[~np.isfinite(coo.data)]):
            issues.append(GeneratorIssue(int(row), "non-finite rate"))
        for row in np.unique(coo.row[coo.data < 0]):
            issues.append(GeneratorIssue(int(row), "negative off-diagonal rate"))
        for row in np.unique(coo.row[(coo.row == coo.col) & (coo.data != 0)]):
            issues.append(GeneratorIssue(int(row), "non-zero diagonal in rates"))
    else:
        rates = dense_rates if dense_rates is not None else gen.rates
        for row in np.flatnonzero(~np.isfinite(rates).all(axis=1)):
            issues.append(GeneratorIssue(int(row), "non-finite rate"))
        for row in np.flatnonzero((rates < 0).any(axis=1)):
            issues.append(GeneratorIssue(int(row), "negative off-diagonal rate"))
        for row in np.flatnonzero(np.diag(rates) != 0):
            issues.append(GeneratorIssue(int(row), "non-zero diagonal in rates"))
    for row in np.flatnonzero(~np.isfinite(gen.kill)):
        issues.append(GeneratorIssue(int(row), "non-finite kill rate"))
    for row in np.flatnonzero(gen.kill < 0):
        issues.append(GeneratorIssue(int(row), "negative kill rate"))
    for row in np.flatnonzero(gen.row_sums() != 0):
        issues.append(GeneratorIssue(int(row), "full row does not sum to zero"))
    issues.sort(key=lambda issue: issue.row)

    unreachable: Tuple[int, ...] = ()
    if gen.n and not issues:
        reach = _absorbing_reach(gen)
        unreachable = tuple(int(state) for state in np.flatnonzero(~reach))
    report = ValidationReport(n=gen.n, issues=tuple(issues), unreachable=unreachable)
    if not report.valid:
        logger.debug("generator rejected: %s", "; ".join(report.messages()[:5]))
    return report
