from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.linalg import expm

from src.chain import (
    AbsorbedGenerator,
    DistributionVector,
    condition,
    conditional_semigroup_apply,
    iter_survival_profiles,
    log_survival_probability,
    survival_probability,
    survival_profile,
    transition_matrix,
    tv_distance,
)

LAMBDA0 = 2 - math.sqrt(2)
ALPHA = np.array([2 - math.sqrt(2), math.sqrt(2) - 1])


def _birth_death(n: int = 6) -> AbsorbedGenerator:
    rates = np.zeros((n, n))
    for k in range(n - 1):
        rates[k, k + 1] = 1.0 + k
        rates[k + 1, k] = 2.0 + 0.5 * k
    kill = np.zeros(n)
    kill[0] = 1.5
    return AbsorbedGenerator(rates=rates, kill=kill)


def test_transition_matrix_matches_expm(t2_generator):
    for t in (0.1, 1.0, 3.7):
        assert np.allclose(transition_matrix(t2_generator, t), expm(t * t2_generator.dense_matrix()), atol=1e-12)
    assert np.array_equal(transition_matrix(t2_generator, 0.0), np.eye(2))


def test_transition_matrix_rejects_negative_time(t2_generator):
    with pytest.raises(ValueError):
        transition_matrix(t2_generator, -1.0)


def test_qsd_survival_is_exponential(t2_generator):
    alpha = DistributionVector(ALPHA / ALPHA.sum())
    for t in (0.5, 2.0, 10.0):
        assert abs(survival_probability(t2_generator, alpha, t) - math.exp(-LAMBDA0 * t)) < 1e-12


def test_log_survival_goes_beyond_underflow(t2_generator):
    alpha = DistributionVector(ALPHA / ALPHA.sum())
    t = 2000.0
    assert math.exp(-LAMBDA0 * t) == 0.0
    assert abs(log_survival_probability(t2_generator, alpha, t) + LAMBDA0 * t) < 1e-6


def test_condition_keeps_the_qsd_fixed(t2_generator):
    alpha = DistributionVector(ALPHA / ALPHA.sum())
    for t in (0.3, 5.0, 400.0):
        assert tv_distance(condition(t2_generator, alpha, t), alpha) < 1e-10


def test_condition_matches_normalised_expm():
    gen = _birth_death()
    start = DistributionVector.dirac(gen.n, 3)
    row = expm(2.5 * gen.dense_matrix())[3]
    assert np.allclose(condition(gen, start, 2.5).weights, row / row.sum(), atol=1e-12)


def test_conditional_semigroup_dirac_formula():
    gen = _birth_death()
    s, t, T = 0.3, 1.0, 4.0
    forward = expm((t - s) * gen.dense_matrix())[2]
    survive = expm((T - t) * gen.dense_matrix()).sum(axis=1)
    expected = forward * survive
    result = conditional_semigroup_apply(gen, DistributionVector.dirac(gen.n, 2), s, t, T)
    assert np.allclose(result.weights, expected / expected.sum(), atol=1e-12)


def test_conditional_semigroup_composes():
    gen = _birth_death()
    start = DistributionVector.dirac(gen.n, 1)
    middle = conditional_semigroup_apply(gen, start, 0.0, 1.0, 3.0)
    two_steps = conditional_semigroup_apply(gen, middle, 1.0, 2.0, 3.0)
    direct = conditional_semigroup_apply(gen, start, 0.0, 2.0, 3.0)
    assert tv_distance(two_steps, direct) < 1e-10


def test_conditional_semigroup_edge_cases():
    gen = _birth_death()
    start = DistributionVector.from_weights(np.arange(1.0, gen.n + 1))
    assert tv_distance(conditional_semigroup_apply(gen, start, 1.0, 1.0, 2.0), start) < 1e-14
    at_horizon = conditional_semigroup_apply(gen, DistributionVector.dirac(gen.n, 0), 0.0, 2.0, 2.0)
    assert tv_distance(at_horizon, condition(gen, DistributionVector.dirac(gen.n, 0), 2.0)) < 1e-12
    with pytest.raises(ValueError):
        conditional_semigroup_apply(gen, start, 2.0, 1.0, 3.0)


def test_survival_profile_scales():
    gen = _birth_death()
    profile, log_scale = survival_profile(gen, 3.0)
    assert profile.max() == 1.0
    assert np.allclose(profile * math.exp(log_scale), transition_matrix(gen, 3.0).sum(axis=1), atol=1e-12)


def test_iter_survival_profiles_follow_the_semigroup():
    gen = _birth_death()
    seen = list(iter_survival_profiles(gen, 0.5, 6))
    assert len(seen) == 7
    assert seen[0][0] == 0.0
    for t, profile, log_scale in seen[1:]:
        exact = transition_matrix(gen, t).sum(axis=1)
        assert np.allclose(profile * math.exp(log_scale), exact, rtol=1e-10, atol=0)


def test_tv_distance_of_disjoint_laws():
    assert tv_distance(DistributionVector.dirac(3, 0), DistributionVector.dirac(3, 2)) == 2.0
    with pytest.raises(ValueError):
        tv_distance(np.ones(2) / 2, np.ones(3) / 3)


def test_semigroup_property_on_random_generators():
    rng = np.random.default_rng(55)
    for _ in range(50):
        n = int(rng.integers(2, 9))
        rates = rng.uniform(0.0, 3.0, (n, n)) * (rng.random((n, n)) < 0.6)
        np.fill_diagonal(rates, 0.0)
        gen = AbsorbedGenerator(rates=rates, kill=rng.uniform(0.0, 1.0, n))
        s, t = rng.uniform(0.0, 3.0, 2)
        product = transition_matrix(gen, s) @ transition_matrix(gen, t)
        assert np.max(np.abs(product - transition_matrix(gen, s + t))) <= 1e-10
