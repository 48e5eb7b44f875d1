import numpy as np
import pytest

from src.chain import tv_distance, validate
from src.criteria import s_series
from src.models import BDSpec, build_bd, max_absorption_rate
from src.spectral import solve_spectral


def test_logistic_generator_layout(logistic_spec):
    gen = build_bd(logistic_spec)
    assert gen.n == 60
    assert validate(gen).valid
    rates = gen.dense_matrix()
    assert rates[0, 1] == 1.0
    assert rates[4, 3] == pytest.approx(5 + 0.1 * 25)
    assert rates[59].tolist().count(0.0) == 58
    assert gen.kill[0] == pytest.approx(0.05 + 1.1)
    assert np.allclose(gen.kill[1:], 0.05)


def test_births_are_dropped_at_the_cap(logistic_spec):
    gen = build_bd(logistic_spec.with_truncation(5))
    assert gen.n == 5
    assert np.allclose(gen.full_matrix().sum(axis=1), 0.0, atol=1e-12)
    assert gen.outflow[-1] == pytest.approx(5 + 2.5 + 0.05)


def test_single_level_chain():
    gen = build_bd(BDSpec(b=1.0, d=2.0, N=1))
    assert gen.n == 1
    assert gen.kill.tolist() == [2.0]


def test_doubling_the_truncation_barely_moves_the_qsd(logistic_spec):
    assert s_series(logistic_spec, 10_000).verdict == "converged"
    coarse = solve_spectral(build_bd(logistic_spec.with_truncation(60))).alpha.weights
    fine = solve_spectral(build_bd(logistic_spec.with_truncation(120))).alpha.weights
    padded = np.concatenate([coarse, np.zeros(60)])
    assert tv_distance(padded, fine) <= 1e-6


def test_max_absorption_rate(logistic_spec):
    assert max_absorption_rate(logistic_spec) == pytest.approx(1.15)


def test_invalid_specs():
    with pytest.raises(ValueError):
        BDSpec(b="k", d="k - 1", N=10)
    with pytest.raises(ValueError):
        BDSpec(b="k", d="k", a=-1.0, N=10)
    with pytest.raises(ValueError):
        BDSpec(b="k", d="k", N=0)
    with pytest.raises(ValueError):
        BDSpec.from_dict({"b": "k", "d": "k"})


def test_spec_dict_round_trip(logistic_spec):
    assert BDSpec.from_dict(logistic_spec.to_dict()).to_dict() == logistic_spec.to_dict()
