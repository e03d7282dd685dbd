import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aerokin.errors import ExtrapolationError, ValidationError
from aerokin.gas import GasModel, a_tilde, growth_constants, maxwellian, tensor_A, viscosity
from aerokin.quadrature import gauss_hermite


def test_maxwellian_moments():
    quad = gauss_hermite(24)
    m = quad.maxwell_weights()
    r2 = np.sum(quad.nodes ** 2, axis=1)
    assert np.sum(m) == pytest.approx(1.0, rel=1e-14)
    assert np.sum(m * r2) == pytest.approx(3.0, rel=1e-13)
    assert np.sum(m * r2 * r2) == pytest.approx(15.0, rel=1e-13)
    assert maxwellian(np.zeros(3)) == pytest.approx((2 * np.pi) ** -1.5)


def test_contraction_a_a_is_ten():
    quad = gauss_hermite(24)
    a = tensor_A(quad.nodes)
    assert np.sum(quad.maxwell_weights() * np.einsum("nij,nij->n", a, a)) == pytest.approx(10.0, rel=1e-13)


@given(st.lists(st.floats(-50, 50), min_size=3, max_size=3))
def test_tensor_a_symmetric_traceless(w):
    a = tensor_A(np.array(w))
    assert np.trace(a) == 0.0
    np.testing.assert_allclose(a, a.T, atol=0)


@pytest.mark.parametrize("alpha", [1.0, 0.37, 4.2])
def test_viscosity_constant_alpha(alpha):
    assert viscosity(GasModel(alpha)) == pytest.approx(alpha, rel=1e-12)


def test_constant_table_matches_constant_alpha():
    gas = GasModel.from_table([0.0, 20.0], [0.37, 0.37])
    assert gas.is_tabulated
    assert viscosity(gas) == pytest.approx(0.37, rel=1e-12)


def test_table_extrapolation_policy():
    gas = GasModel.from_table([0.0, 2.0], [1.0, 2.0])
    with pytest.warns(RuntimeWarning):
        assert gas.alpha_of(np.array([5.0]))[0] == pytest.approx(2.0)
    strict = GasModel.from_table([0.0, 2.0], [1.0, 2.0], extrapolate=False)
    with pytest.raises(ExtrapolationError):
        strict.alpha_of(np.array([5.0]))


def test_table_validation():
    with pytest.raises(ValidationError):
        GasModel.from_table([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ValidationError):
        GasModel.from_table([0.0], [1.0])


def test_a_tilde_growth_bound():
    # |A(w)| = sqrt(2/3) |w|^2, so the sampled constant is reached at the largest radius 10
    c_val, c_grad = growth_constants(GasModel(1.0))
    assert c_val == pytest.approx(np.sqrt(2.0 / 3.0) * 100 / 101, rel=1e-12)
    assert 0.0 < c_grad < 3.0


@settings(max_examples=25)
@given(st.floats(0.1, 5.0))
def test_a_tilde_scales_linearly_in_alpha(alpha):
    w = np.array([[0.3, -1.2, 2.0], [0.0, 0.0, 0.0]])
    np.testing.assert_allclose(a_tilde(GasModel(alpha), w), alpha * tensor_A(w), rtol=1e-15)
