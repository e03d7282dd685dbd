import numpy as np
import pytest

from aerokin import _fallback, kernels
from aerokin.distributions import GaussianMixture
from aerokin.errors import NonConvergenceError, ValidationError
from aerokin.particles import ParticleEnsemble
from aerokin.simulation import SimConfig, initial_state, run, step

KAPPA = 2.963235


def small(**kw):
    base = dict(grid=8, n_particles=1500, dt=0.05, t_end=0.5, kappa=KAPPA, nu=1.0)
    base.update(kw)
    return SimConfig(**base)


@pytest.mark.parametrize("kw", [dict(grid=12), dict(t_end=0.33), dict(deposition_order=2),
                                dict(dt=-1.0), dict(kappa=0.0), dict(seed=-1), dict(threads=0)])
def test_config_validation(kw):
    with pytest.raises(ValidationError):
        small(**kw)


def test_coupled_run_conserves_total_momentum():
    rows = run(small())
    mom = np.array([[r["momentum_x"], r["momentum_y"], r["momentum_z"]] for r in rows])
    np.testing.assert_allclose(mom, np.broadcast_to(mom[0], mom.shape), atol=1e-13)
    assert all(r["stokes_residual"] <= 1e-12 for r in rows)
    assert rows[-1]["step"] == 10 and rows[-1]["time"] == pytest.approx(0.5)


def test_relative_energy_decays_monotonically():
    cfg = small(velocity=GaussianMixture.single((1.0, 0.0, 0.0), 0.05), t_end=1.0)
    energy = [r["relative_kinetic_energy"] for r in run(cfg)]
    assert all(b < a for a, b in zip(energy, energy[1:]))
    assert energy[-1] < 0.1 * energy[0]


def test_step_leaves_input_untouched():
    cfg = small()
    state = initial_state(cfg)
    before = state.particles.copy()
    new = step(state, cfg)
    np.testing.assert_array_equal(state.particles.velocities, before.velocities)
    np.testing.assert_array_equal(state.particles.positions, before.positions)
    assert new.step == 1 and not np.array_equal(new.particles.positions, before.positions)


def test_uncoupled_drift_is_free_flight():
    x0 = np.array([[0.1, 0.2, 0.3]])
    p = ParticleEnsemble(x0, np.array([[0.4, 0.0, 0.0]]), np.ones(1))
    cfg = small(coupling=False, frozen_velocity=(0.4, 0.0, 0.0), t_end=1.0)
    state = initial_state(cfg, p)
    for _ in range(cfg.n_steps):
        state = step(state, cfg)
    np.testing.assert_allclose(state.particles.positions, [[0.5, 0.2, 0.3]], atol=1e-14)


def test_output_every_and_callback():
    seen = []
    rows = run(small(output_every=4), on_output=lambda state, row: seen.append(state.step))
    assert seen == [0, 4, 8, 10] and len(rows) == 4


def test_initial_solve_failure_has_nothing_to_dump(tmp_path):
    with pytest.raises(NonConvergenceError):
        run(small(max_iter=1, tol=1e-15), out_dir=tmp_path)
    assert not (tmp_path / "abort_state.npz").exists()


def test_failure_mid_run_dumps_state(tmp_path, monkeypatch):
    from aerokin import simulation

    cfg = small(t_end=0.2)
    calls = {"n": 0}
    real = simulation.solve_fluid

    def flaky(particles, config, previous=None):
        calls["n"] += 1
        if calls["n"] > 3:
            raise NonConvergenceError("forced", iterations=1, residual=1.0)
        return real(particles, config, previous)

    monkeypatch.setattr(simulation, "solve_fluid", flaky)
    with pytest.raises(NonConvergenceError):
        run(cfg, out_dir=tmp_path)
    dump = np.load(tmp_path / "abort_state.npz")
    assert int(dump["step"]) == 1 and dump["positions"].shape == (1500, 3)


def test_no_particles():
    rows = run(small(n_particles=0, t_end=0.1))
    assert rows[-1]["max_fluid_speed"] == 0.0 and rows[-1]["total_weight"] == 0.0


def test_fallback_backend_matches(monkeypatch):
    cfg = small(t_end=0.2)
    compiled = run(cfg)
    monkeypatch.setattr(kernels, "_impl", _fallback)
    python = run(cfg)
    for a, b in zip(compiled, python):
        assert a["relative_kinetic_energy"] == pytest.approx(b["relative_kinetic_energy"], rel=1e-10)
        assert a["max_fluid_speed"] == pytest.approx(b["max_fluid_speed"], rel=1e-10)
