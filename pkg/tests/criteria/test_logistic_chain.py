"""Certified bounds on the 60-level logistic chain with catastrophes."""
from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.linalg import expm

from src.chain import transition_matrix, tv_distance
from src.criteria import (
    CertificationConfig,
    c2_alpha_lower_bound,
    c2_of_mu,
    certify,
    choose_t_max,
    explicit_bound,
    lipschitz_slack,
    master_bound_slack,
    tv_to_qsd_curve,
)
from src.models import build_bd
from src.spectral import qprocess_generator, qprocess_transition, solve_spectral, spectrum_report


@pytest.fixture(scope="module")
def logistic(logistic_spec):
    gen = build_bd(logistic_spec)
    triple = solve_spectral(gen)
    return gen, triple, certify(gen, triple)


def test_master_bound_on_every_dirac_start(logistic):
    gen, triple, cert = logistic
    curve = tv_to_qsd_curve(gen, triple.alpha, 20.0, 0.25)
    assert curve.distances.shape == (81, 60)
    assert master_bound_slack(cert, curve) >= -1e-9


def test_lipschitz_bound_on_random_pairs(logistic):
    gen, triple, cert = logistic
    t_max = choose_t_max(gen, triple, CertificationConfig())
    rng = np.random.default_rng(2024)
    for _ in range(50):
        mu1, mu2 = rng.dirichlet(np.ones(gen.n)), rng.dirichlet(np.ones(gen.n))
        c2_1 = c2_of_mu(gen, mu1, triple, t_max, cert.t0 / 4)
        c2_2 = c2_of_mu(gen, mu2, triple, t_max, cert.t0 / 4)
        slack = lipschitz_slack(gen, cert, mu1, mu2, c2_1, c2_2, 20.0, 0.5)
        assert slack.min() >= -1e-9


def test_spectrum_sits_below_the_certified_rate(logistic):
    gen, triple, cert = logistic
    report = spectrum_report(gen, triple, gamma_bound=cert.gamma_bound)
    assert report.ok
    assert not report.violations


def test_survival_sandwich(logistic):
    gen, triple, cert = logistic
    for t in range(1, 11):
        worst = transition_matrix(gen, float(t)).sum(axis=1).max()
        decay = math.exp(-triple.lambda0 * t)
        assert decay - 1e-9 <= worst <= decay / cert.c2_alpha + 1e-9
    assert c2_alpha_lower_bound(2.0, cert.gamma_bound, triple.lambda0) <= cert.c2_alpha + 1e-9


def test_qprocess_forgets_its_start(logistic):
    gen, triple, cert = logistic
    for t in (1.0, 2.0, 5.0, 10.0):
        kernel = qprocess_transition(gen, triple, t)
        assert np.allclose(kernel.sum(axis=1), 1.0, rtol=0, atol=1e-10)
        for x, y in ((0, 59), (5, 30), (20, 21)):
            assert tv_distance(kernel[x], kernel[y]) <= explicit_bound(cert, t) + 1e-9


def test_qprocess_transition_is_the_exponential_of_its_generator(logistic):
    gen, triple, _ = logistic
    q = qprocess_generator(gen, triple)
    assert np.allclose(qprocess_transition(gen, triple, 2.0), expm(2.0 * q.generator), rtol=0, atol=1e-12)
