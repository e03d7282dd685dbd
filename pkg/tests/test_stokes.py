import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aerokin.errors import NonConvergenceError, ValidationError
from aerokin.stokes import (leray_project, reference_density, resolved_modes, spectral_divergence,
                            stokes_solve, wavenumbers)

N = 16


def bumpy_density(n=N, contrast=0.8):
    x = np.arange(n) / n
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
    return 1.0 + contrast * np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Z)


def random_flux(seed, n=N):
    return np.random.default_rng(seed).standard_normal((3, n, n, n))


def test_nyquist_modes_are_dropped():
    keep = resolved_modes(8)
    k = wavenumbers(8)
    assert not np.any(keep & (np.abs(k[0]) == 4))
    assert not np.any(keep[..., -1])
    assert keep[0, 0, 0] and keep[3, -3, 3]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_leray_projection_is_idempotent_and_solenoidal(seed):
    rng = np.random.default_rng(seed)
    spec = rng.standard_normal((3, 8, 8, 5)) + 1j * rng.standard_normal((3, 8, 8, 5))
    k = wavenumbers(8)
    once = leray_project(spec, k)
    np.testing.assert_allclose(leray_project(once, k), once, atol=1e-12)
    div = k[0] * once[0] + k[1] * once[1] + k[2] * once[2]
    assert np.max(np.abs(div)) < 1e-12


def test_variable_density_solution_satisfies_equations():
    rho = bumpy_density()
    flux = random_flux(1)
    field = stokes_solve(rho, flux, 0.5, 3.0)
    assert field.residual <= 1e-12
    assert field.divergence() <= 1e-12
    # the mean mode balances: int kappa (j - rho u) dx = 0
    np.testing.assert_allclose(np.mean(flux - rho * field.velocity, axis=(1, 2, 3)), 0.0, atol=1e-12)
    assert field.history[-1] == field.residual


def test_fixed_point_and_cg_agree_for_mild_density():
    rho = bumpy_density(contrast=0.3)
    flux = random_flux(2)
    cg = stokes_solve(rho, flux, 1.0, 1.0)
    fp = stokes_solve(rho, flux, 1.0, 1.0, method="fixed-point", max_iter=500)
    np.testing.assert_allclose(fp.velocity, cg.velocity, atol=1e-10)
    mean_shift = stokes_solve(rho, flux, 1.0, 1.0, shift="mean")
    np.testing.assert_allclose(mean_shift.velocity, cg.velocity, atol=1e-10)


def test_warm_start_converges_faster():
    rho = bumpy_density()
    flux = random_flux(3)
    cold = stokes_solve(rho, flux, 1.0, 2.0)
    warm = stokes_solve(rho, flux, 1.0, 2.0, u_prev=cold.velocity)
    assert warm.iterations < cold.iterations


def test_empty_cells_handled():
    rho = np.zeros((N, N, N))
    rho[4:8, 4:8, 4:8] = 50.0
    flux = np.zeros((3, N, N, N))
    flux[0] = rho * 1.5
    field = stokes_solve(rho, flux, 1.0, 3.0)
    assert field.residual <= 1e-12
    with pytest.raises(NonConvergenceError) as info:
        stokes_solve(rho, flux, 1.0, 3.0, method="fixed-point", max_iter=20)
    assert info.value.iterations == 20 and info.value.residual > 1e-12


def test_no_particles_gives_rest():
    field = stokes_solve(np.zeros((8, 8, 8)), np.zeros((3, 8, 8, 8)), 1.0, 1.0)
    assert field.max_speed() == 0.0


def test_threaded_transforms_match():
    rho = bumpy_density()
    flux = random_flux(4)
    a = stokes_solve(rho, flux, 1.0, 1.0)
    b = stokes_solve(rho, flux, 1.0, 1.0, workers=4)
    np.testing.assert_array_equal(a.velocity, b.velocity)


def test_validation():
    rho = np.ones((8, 8, 8))
    flux = np.zeros((3, 8, 8, 8))
    with pytest.raises(ValidationError):
        stokes_solve(rho, flux[:, :4], 1.0, 1.0)
    with pytest.raises(ValidationError):
        stokes_solve(-rho, flux, 1.0, 1.0)
    with pytest.raises(ValidationError):
        stokes_solve(rho, flux, 0.0, 1.0)
    with pytest.raises(ValidationError):
        stokes_solve(rho, flux, 1.0, 1.0, method="jacobi")
    with pytest.raises(ValidationError):
        reference_density(rho, "median")
    with pytest.raises(ValidationError):
        stokes_solve(np.zeros((8, 8, 8)), flux + 1.0, 1.0, 1.0)


def test_divergence_of_gradient_field_detected():
    k = wavenumbers(8)
    spec = np.stack([k[i] * (1.0 + 0j) for i in range(3)])
    assert spectral_divergence(spec) > 1.0
