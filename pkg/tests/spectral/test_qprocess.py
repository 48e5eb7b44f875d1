from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.linalg import expm

from src.chain import DistributionVector, tv_distance
from src.spectral import (
    QProcess,
    SpectralTriple,
    apply_qprocess_generator,
    generator_identity_residual,
    qprocess_generator,
    qprocess_law,
    qprocess_transition,
    solve_spectral,
)

SQRT2 = math.sqrt(2)


@pytest.fixture
def t2_triple(t2_generator):
    return solve_spectral(t2_generator)


def test_qprocess_generator_on_two_state_chain(t2_generator, t2_triple):
    q = qprocess_generator(t2_generator, t2_triple)
    assert np.allclose(q.generator, [[-SQRT2, SQRT2], [SQRT2, -SQRT2]], atol=1e-12)
    assert np.allclose(q.generator.sum(axis=1), 0.0, atol=1e-12)
    assert np.allclose(q.beta.weights, [0.5, 0.5], atol=1e-12)
    assert q.invariance_residual() < 1e-12
    assert generator_identity_residual(t2_generator, t2_triple, q) < 1e-12


def test_qprocess_transition_is_stochastic(t2_generator, t2_triple):
    for t in (0.5, 1.0, 3.0, 5.0):
        kernel = qprocess_transition(t2_generator, t2_triple, t)
        assert np.all(kernel >= 0)
        assert np.allclose(kernel.sum(axis=1), 1.0, atol=1e-10)


def test_transition_is_the_exponential_of_the_generator(t2_generator, t2_triple):
    q = qprocess_generator(t2_generator, t2_triple)
    for t in (0.5, 1.0, 5.0):
        assert np.allclose(qprocess_transition(t2_generator, t2_triple, t), expm(t * q.generator), rtol=0, atol=1e-12)


@pytest.mark.parametrize("t", [0.5, 1.0, 5.0])
def test_beta_is_invariant(t2_generator, t2_triple, t):
    q = qprocess_generator(t2_generator, t2_triple)
    assert tv_distance(qprocess_law(t2_generator, t2_triple, q.beta, t), q.beta) <= 1e-10


def test_beta_is_attracting(t2_generator, t2_triple):
    q = qprocess_generator(t2_generator, t2_triple)
    start = DistributionVector.dirac(2, 0)
    for t in (0.5, 1.5):
        distance = tv_distance(qprocess_law(t2_generator, t2_triple, start, t), q.beta)
        assert distance == pytest.approx(math.exp(-2 * SQRT2 * t), rel=1e-8)


def test_weak_generator_matches_matrix_form(t2_generator, t2_triple):
    q = qprocess_generator(t2_generator, t2_triple)
    f = np.array([0.3, -1.2])
    assert np.allclose(apply_qprocess_generator(t2_generator, t2_triple, f), q.generator @ f, atol=1e-12)
    assert np.allclose(apply_qprocess_generator(t2_generator, t2_triple, np.ones(2)), 0.0, atol=1e-12)


def test_non_positive_eta_is_rejected(t2_generator, t2_triple):
    broken = SpectralTriple(
        lambda0=t2_triple.lambda0, alpha=t2_triple.alpha, eta=np.array([1.0, 0.0]), gap=t2_triple.gap
    )
    with pytest.raises(ValueError):
        qprocess_generator(t2_generator, broken)


def test_qprocess_dict_round_trip(t2_generator, t2_triple):
    q = qprocess_generator(t2_generator, t2_triple)
    assert QProcess.from_dict(q.to_dict()) == q
