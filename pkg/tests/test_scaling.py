import warnings

import pytest
from hypothesis import given, strategies as st

from aerokin.errors import DilutenessWarning, ValidationError
from aerokin.scaling import (PhysicalSetup, ScalingTriple, admissible_sequence, check_power_constraints,
                             check_sequence, nondimensionalize, power_sequence)


def consistent_setup(**overrides):
    # eps = 0.1, eta = 0.01, mu = 0.5; closures N_p S_pg L = 0.2, N_g S_gg L = 5
    values = dict(box_size=1.0, n_particles_density=2.0, n_gas_density=100.0,
                  thermal_speed_particles=0.1, thermal_speed_gas=1.0, cross_section_pp=1e-3,
                  cross_section_pg=0.1, cross_section_gg=0.05, mass_ratio=0.01, mass_fraction=0.5)
    values.update(overrides)
    return PhysicalSetup(**values)


def test_nondimensionalize_consistent_setup():
    system = nondimensionalize(consistent_setup())
    t = system.triple
    assert t.epsilon == pytest.approx(0.1, rel=1e-15)
    assert t.eta == 0.01 and t.mu == 0.5
    assert system.inv_eta == pytest.approx(100.0)
    assert system.inv_mu == pytest.approx(2.0)
    assert system.mu_over_eps2 == pytest.approx(50.0)
    assert system.dilute


def test_closure_mismatch_rejected():
    with pytest.raises(ValidationError, match="S_pg"):
        nondimensionalize(consistent_setup(cross_section_pg=0.11))
    with pytest.raises(ValidationError, match="S_gg"):
        nondimensionalize(consistent_setup(cross_section_gg=0.051))


def test_dense_spray_warns_but_returns():
    with pytest.warns(DilutenessWarning):
        system = nondimensionalize(consistent_setup(cross_section_pp=0.01))
    assert not system.dilute


def test_setup_validation():
    with pytest.raises(ValidationError):
        consistent_setup(box_size=-1.0)
    with pytest.raises(ValidationError, match="N_p/N_g"):
        consistent_setup(mass_fraction=0.4)
    with pytest.raises(ValidationError):
        consistent_setup(thermal_speed_particles=2.0)


def test_triple_bounds():
    with pytest.raises(ValidationError):
        ScalingTriple(0.0, 0.1, 0.1)
    with pytest.raises(ValidationError):
        ScalingTriple(0.5, 1.5, 0.1)
    assert ScalingTriple(0.1, 0.001, 0.5).within_limit_constraints


def test_admissible_sequence_values():
    seq = admissible_sequence(4)
    assert [(s.mu, s.epsilon, s.eta) for s in seq] == [(1 / n, n ** -3.0, n ** -8.0) for n in (2, 3, 4)]
    check_sequence(seq)


def test_sequence_rejections_name_the_limit():
    with pytest.raises(ValidationError, match="eta/eps"):
        power_sequence(1, 3, 6)
    with pytest.raises(ValidationError, match="eps/mu"):
        power_sequence(1, 2, 5)
    with pytest.raises(ValidationError, match="mu -> 0"):
        power_sequence(0, 3, 8)
    flat = [ScalingTriple(0.1, 1e-3, 0.5), ScalingTriple(0.1, 1e-4, 0.4)]
    with pytest.raises(ValidationError, match="epsilon"):
        check_sequence(flat, require=())


@given(st.floats(0.1, 4), st.floats(0.1, 10), st.floats(0.1, 30))
def test_power_constraints_match_inequalities(a, b, c):
    ok = c > 2 * b and b > 2 * a
    if ok:
        check_power_constraints(a, b, c)
        seq = power_sequence(a, b, c)
        check_sequence(seq)
    else:
        with pytest.raises(ValidationError):
            check_power_constraints(a, b, c)
