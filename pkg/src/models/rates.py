"""Rate sequences indexed by the population level ``k ≥ 1``.

Model files describe rates either as a number, an explicit table
``[r_1, r_2, ...]`` or a small arithmetic expression in ``k``::

    "k + 0.1*k^2"     "0.05"     "2*k/(1 + k)"

Expressions only admit numbers, ``k``, ``+ - * / ^`` and parentheses; they
are parsed with sympy and compiled to a numpy function.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence, Tuple

import numpy as np
import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

_ALLOWED = re.compile(r"^[0-9k+\-*/^().eE\s]+$")
_LEVEL = sympy.Symbol("k", positive=True)


def _compile(expression: str) -> Callable[[np.ndarray], np.ndarray]:
    if not _ALLOWED.match(expression):
        raise ValueError(f"rate expression {expression!r} uses characters outside 0-9 k + - * / ^ ( ) .")
    try:
        parsed = parse_expr(
            expression,
            local_dict={"k": _LEVEL, "e": sympy.E, "E": sympy.E},
            transformations=standard_transformations + (convert_xor,),
        )
    except (SyntaxError, TypeError, sympy.SympifyError) as exc:
        raise ValueError(f"cannot parse rate expression {expression!r}: {exc}") from exc
    if not parsed.free_symbols <= {_LEVEL}:
        raise ValueError(f"rate expression {expression!r} may only depend on k")
    return sympy.lambdify(_LEVEL, parsed, modules="numpy")


@dataclass(frozen=True)
class RateSequence:
    """Vectorised ``k ↦ r_k`` built from a constant, a table, an expression or a callable."""

    source: Any
    function: Callable[[np.ndarray], np.ndarray] = field(init=False, repr=False, compare=False)
    table: Tuple[float, ...] | None = field(init=False, default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        source = self.source
        table = None
        if isinstance(source, bool):
            raise ValueError("rates cannot be booleans")
        if isinstance(source, (int, float)):
            value = float(source)
            function = lambda k, value=value: np.full(np.shape(k), value)  # noqa: E731
        elif isinstance(source, str):
            function = _compile(source.strip())
        elif callable(source):
            function = source
        elif isinstance(source, Sequence):
            table = tuple(float(value) for value in source)
            if not table:
                raise ValueError("rate table is empty")
            values = np.array((np.nan,) + table)

            def function(k: np.ndarray, values: np.ndarray = values) -> np.ndarray:
                index = np.asarray(k, dtype=np.int64)
                if np.any(index < 1) or np.any(index >= values.size):
                    raise ValueError(f"rate table covers k = 1..{values.size - 1} only")
                return values[index]

        else:
            raise ValueError(f"unsupported rate description {source!r}")
        object.__setattr__(self, "function", function)
        object.__setattr__(self, "table", table)

    def __call__(self, k: np.ndarray | float) -> np.ndarray:
        levels = np.asarray(k, dtype=float)
        return np.broadcast_to(np.asarray(self.function(levels), dtype=float), levels.shape).copy()

    def to_json(self) -> Any:
        if self.table is not None:
            return list(self.table)
        if isinstance(self.source, (int, float, str)):
            return self.source
        raise ValueError("callable rates cannot be serialised")


def as_rate(source: Any) -> RateSequence:
    return source if isinstance(source, RateSequence) else RateSequence(source)
