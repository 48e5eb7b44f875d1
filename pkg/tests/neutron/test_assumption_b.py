import math

import pytest

from src.neutron import AssumptionBParams, disk_assumption_b_params


def test_unit_disk_parameters():
    params = disk_assumption_b_params(1.0, 0.1)
    assert params.verified
    assert params.deep_radius == pytest.approx(0.9)
    assert params.half_angle == pytest.approx(0.5 * math.asin(0.9))
    assert params.sigma_lower == pytest.approx(params.half_angle / math.pi)
    assert params.s_eps == pytest.approx(0.1208, abs=5e-4)
    assert params.t_eps == pytest.approx(1.525, abs=5e-3)
    assert params.to_dict()["epsilon"] == 0.1


def test_parameters_scale_with_the_radius():
    unit = disk_assumption_b_params(1.0, 0.1)
    large = disk_assumption_b_params(3.0, 0.3)
    assert large.s_eps == pytest.approx(3 * unit.s_eps, rel=1e-6)
    assert large.t_eps == pytest.approx(3 * unit.t_eps, rel=1e-6)
    assert large.sigma_lower == pytest.approx(unit.sigma_lower)


def test_wider_shells_give_smaller_cones():
    values = [disk_assumption_b_params(1.0, eps).sigma_lower for eps in (0.05, 0.1, 0.2, 0.4)]
    assert values == sorted(values, reverse=True)


def test_epsilon_range():
    with pytest.raises(ValueError):
        disk_assumption_b_params(1.0, 0.5)
    with pytest.raises(ValueError):
        disk_assumption_b_params(1.0, 0.0)
    with pytest.raises(ValueError):
        disk_assumption_b_params(-1.0, 0.1)
    with pytest.raises(ValueError):
        AssumptionBParams(
            epsilon=0.1, s_eps=1.0, t_eps=0.5, sigma_lower=0.1, half_angle=0.3, deep_radius=0.9, verified=False
        )
