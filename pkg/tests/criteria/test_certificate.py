from __future__ import annotations

import math

import numpy as np
import pytest

from src.chain import AbsorbedGenerator, DistributionVector, conditional_semigroup_apply, transition_matrix, tv_distance
from src.criteria import (
    CertificationConfig,
    CriteriaCertificate,
    c2_alpha_lower_bound,
    c2_dirac_profile,
    c2_of_mu,
    certify,
    certify_a1,
    certify_a2,
    choose_t_max,
    conditioned_kernel,
    explicit_bound,
    gamma_from_constants,
    infimum_measure,
)
from src.errors import CriteriaViolation
from src.spectral import solve_spectral

SQRT2 = math.sqrt(2)


@pytest.fixture
def t2_triple(t2_generator):
    return solve_spectral(t2_generator)


def test_infimum_measure_is_entrywise_minimum():
    rows = np.array([[0.5, 0.3, 0.2], [0.1, 0.6, 0.3]])
    assert np.allclose(infimum_measure(rows), [0.1, 0.3, 0.2])
    with pytest.raises(ValueError):
        infimum_measure([])
    with pytest.raises(ValueError):
        infimum_measure([np.ones(2), np.ones(3)])


def test_conditioned_kernel_rows_are_laws(t2_generator):
    rows = conditioned_kernel(t2_generator, 1.0)
    assert np.allclose(rows.sum(axis=1), 1.0, atol=1e-14)
    assert np.all(rows > 0)


def test_a1_minorization_holds_entrywise(t2_generator):
    nu, c1 = certify_a1(t2_generator, 1.0)
    assert 0 < c1 <= 1
    rows = conditioned_kernel(t2_generator, 1.0)
    assert np.all(rows - c1 * nu.weights[None, :] >= -1e-12)


def test_symmetric_chain_mixes_in_one_step():
    gen = AbsorbedGenerator(rates=np.array([[0.0, 1.0], [1.0, 0.0]]), kill=np.array([1.0, 1.0]))
    nu, c1 = certify_a1(gen, 20.0)
    assert abs(c1 - 1.0) < 1e-12
    assert np.allclose(nu.weights, [0.5, 0.5])


def test_a1_fails_without_communication():
    gen = AbsorbedGenerator(rates=np.zeros((2, 2)), kill=np.array([1.0, 2.0]))
    with pytest.raises(CriteriaViolation) as excinfo:
        certify_a1(gen, 1.0)
    assert excinfo.value.verdict == "A1-FAIL"
    with pytest.raises(ValueError):
        certify_a1(gen, 0.0)


def test_a2_needs_a_long_enough_horizon(t2_generator, t2_triple):
    nu, _ = certify_a1(t2_generator, 1.0)
    with pytest.raises(CriteriaViolation) as excinfo:
        certify_a2(t2_generator, nu, t2_triple, t_max=0.1, grid_step=0.025)
    assert excinfo.value.verdict == "A2-EXTEND-TMAX"
    scan = certify_a2(t2_generator, nu, t2_triple, t_max=15.0, grid_step=0.25)
    assert 0 < scan.value <= 1
    assert scan.value == pytest.approx(min(scan.ratios.min(), scan.asymptote))


def test_choose_t_max_starts_from_ten_mean_lifetimes(t2_generator, t2_triple):
    assert choose_t_max(t2_generator, t2_triple, CertificationConfig()) == pytest.approx(10 / t2_triple.lambda0)


def test_certify_two_state_chain(t2_generator, t2_triple):
    cert = certify(t2_generator, t2_triple)
    assert cert.t0 in [f / t2_triple.lambda0 for f in CertificationConfig().t0_factors]
    assert 0 < cert.c1 <= 1 and 0 < cert.c2 <= 1
    assert cert.gamma_bound == pytest.approx(gamma_from_constants(cert.c1, cert.c2, cert.t0))
    # The certified rate can never beat the true spectral gap.
    assert cert.gamma_bound <= t2_triple.gap + 1e-9
    assert cert.c2_dirac.shape == (2,)
    assert 0 < cert.c2_alpha <= 1
    assert cert.c2_alpha >= c2_alpha_lower_bound(cert.C_bound, cert.gamma_bound, t2_triple.lambda0)


def test_certify_keeps_the_best_candidate(t2_generator, t2_triple):
    best = certify(t2_generator, t2_triple)
    for factor in CertificationConfig().t0_factors:
        single = certify(t2_generator, t2_triple, t0=factor / t2_triple.lambda0)
        assert single.c1 * single.c2 <= best.c1 * best.c2 + 1e-15


def test_certify_rejects_coarse_grids(t2_generator, t2_triple):
    with pytest.raises(ValueError):
        certify(t2_generator, t2_triple, t0=1.0, grid_step=0.5)


def test_c2_sandwich(t2_generator, t2_triple):
    dirac = c2_dirac_profile(t2_generator, t2_triple, 10.0, 0.5)
    for weights in ([0.5, 0.5], [0.9, 0.1], t2_triple.alpha.weights):
        value = c2_of_mu(t2_generator, np.asarray(weights), t2_triple, 10.0, 0.5)
        assert dirac.min() - 1e-12 <= value <= 1.0


def test_explicit_bound_steps_down_every_t0():
    cert = CriteriaCertificate(
        t0=2.0, nu=DistributionVector.uniform(2), c1=0.5, c2=0.5, c2_alpha=0.5, gamma_bound=0.1438
    )
    assert explicit_bound(cert, 0.0) == 2.0
    assert explicit_bound(cert, 1.99) == 2.0
    assert explicit_bound(cert, 2.0) == pytest.approx(1.5)
    assert explicit_bound(cert, 4.5) == pytest.approx(2 * 0.75**2)
    with pytest.raises(ValueError):
        explicit_bound(cert, -1.0)


def test_gamma_from_constants():
    assert gamma_from_constants(0.5, 0.5, 2.0) == pytest.approx(-math.log(0.75) / 2)
    assert math.isinf(gamma_from_constants(1.0, 1.0, 1.0))


def test_c2_alpha_lower_bound_closed_form():
    u = 2 - math.sqrt(3)
    expected = math.exp(math.log(u) - 2 / (1 - u))
    assert c2_alpha_lower_bound(2.0, 1.0, 1.0) == pytest.approx(expected, rel=1e-9)
    with pytest.raises(ValueError):
        c2_alpha_lower_bound(2.0, 0.0, 1.0)


def test_certificate_dict_round_trip(t2_generator, t2_triple):
    cert = certify(t2_generator, t2_triple)
    assert CriteriaCertificate.from_dict(cert.to_dict()) == cert


def test_certificate_constants_are_range_checked():
    with pytest.raises(ValueError):
        CriteriaCertificate(t0=1.0, nu=DistributionVector.uniform(2), c1=1.5, c2=0.5, c2_alpha=0.5, gamma_bound=1.0)


def _four_level_chain() -> AbsorbedGenerator:
    rates = np.zeros((4, 4))
    for k in range(3):
        rates[k, k + 1] = 1.0 + k
        rates[k + 1, k] = 1.5 + k
    return AbsorbedGenerator(rates=rates, kill=np.array([0.8, 0.0, 0.1, 0.0]))


def test_minorizing_constant_is_maximal(t2_generator):
    for gen in (t2_generator, _four_level_chain()):
        for t0 in (0.5, 1.0, 3.0):
            nu, c1 = certify_a1(gen, t0)
            rows = conditioned_kernel(gen, t0)
            assert (rows - c1 * (1 + 1e-6) * nu.weights[None, :]).min() < 0


@pytest.mark.parametrize("chain", ["t2", "four_level"])
def test_conditional_semigroup_contracts_over_one_t0(chain, t2_generator):
    gen = t2_generator if chain == "t2" else _four_level_chain()
    cert = certify(gen, solve_spectral(gen))
    contraction = 2 * (1 - cert.c1 * cert.c2)
    s = 0.7
    for k in range(9):
        T = s + cert.t0 + k * cert.t0 / 4
        laws = [
            conditional_semigroup_apply(gen, DistributionVector.dirac(gen.n, x), s, s + cert.t0, T)
            for x in range(gen.n)
        ]
        for x in range(gen.n):
            for y in range(x + 1, gen.n):
                assert tv_distance(laws[x], laws[y]) <= contraction + 1e-9


def _fine_grid_c2(gen, triple, weights, t_max, step):
    best = float(weights @ triple.eta) / float(triple.eta.max())
    for t in np.arange(0.0, t_max + step / 2, step):
        survival = transition_matrix(gen, float(t)).sum(axis=1)
        best = min(best, float(weights @ survival) / float(survival.max()))
    return best


def test_c2_matches_a_ten_times_finer_grid(t2_generator, t2_triple):
    config = CertificationConfig()
    t_max = choose_t_max(t2_generator, t2_triple, config)
    cert = certify(t2_generator, t2_triple)
    step = cert.t0 / 4
    assert cert.c2 == pytest.approx(_fine_grid_c2(t2_generator, t2_triple, cert.nu.weights, t_max, step / 10), abs=1e-6)
    uniform = np.array([0.5, 0.5])
    value = c2_of_mu(t2_generator, uniform, t2_triple, t_max, step)
    assert value == pytest.approx(_fine_grid_c2(t2_generator, t2_triple, uniform, t_max, step / 10), abs=1e-6)
    # Survival from the second state dominates, and the ratio decreases to its limit.
    assert value == pytest.approx((1 + 1 / SQRT2) / 2, abs=1e-6)
