"""Generators of the birth-death example processes."""

from .birth_death import BDSpec, build_bd, max_absorption_rate
from .multitype import (
    DEFAULT_STATE_BUDGET,
    DominationRates,
    MultiBDSpec,
    WeakCooperation,
    aggregate_rates,
    build_multibd,
    build_multibd_cooperative,
    build_multibd_mutation,
    check_weak_cooperation,
    domination_rates,
    enumerate_states,
)
from .rates import RateSequence, as_rate

__all__ = [
    "BDSpec",
    "DEFAULT_STATE_BUDGET",
    "DominationRates",
    "MultiBDSpec",
    "RateSequence",
    "WeakCooperation",
    "aggregate_rates",
    "as_rate",
    "build_bd",
    "build_multibd",
    "build_multibd_cooperative",
    "build_multibd_mutation",
    "check_weak_cooperation",
    "domination_rates",
    "enumerate_states",
    "max_absorption_rate",
]
