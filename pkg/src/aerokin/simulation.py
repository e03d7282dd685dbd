"""Particle transport with linear drag, coupled to a quasi-static Stokes gas.

One step of size dt (Strang splitting):
  half drift, deposit, Stokes solve, exact drag kick, half drift.
The kick v <- u(x) + (v - u(x)) exp(-kappa dt) uses the gas velocity at the
particle. With the corrector on, the kick is predicted, the gas re-solved
from the predicted flux, and the kick redone with the average of the two gas
velocities, which keeps the coupled step second order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .distributions import GaussianMixture
from .errors import AerokinError, ValidationError
from .particles import ParticleEnsemble, deposit_moments, interpolate_velocity, sample_ensemble
from .stokes import FluidField, stokes_solve

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimConfig:
    grid: int = 16
    n_particles: int = 100_000
    dt: float = 0.01
    t_end: float = 1.0
    kappa: float = 1.0
    nu: float = 1.0
    deposition_order: int = 1
    tol: float = 1e-12
    max_iter: int = 200
    output_every: int = 1
    seed: int = 0
    threads: int = 1
    coupling: bool = True
    corrector: bool = True
    frozen_velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)
    shift: str = "midrange"
    total_weight: float = 1.0
    position: GaussianMixture = field(
        default_factory=lambda: GaussianMixture.single((0.5, 0.5, 0.5), 0.1))
    velocity: GaussianMixture = field(
        default_factory=lambda: GaussianMixture.single((1.0, 0.0, 0.0), 0.1))
    dump_fields: bool = False

    def __post_init__(self):
        n = self.grid
        if n < 2 or n & (n - 1):
            raise ValidationError(f"grid must be a power of two >= 2, got {n}")
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValidationError("dt must be positive")
        if not self.t_end >= 0.0:
            raise ValidationError("t_end must be nonnegative")
        if not self.tol > 0.0:
            raise ValidationError("tol must be positive")
        if self.max_iter < 1 or self.output_every < 1 or self.threads < 1 or self.n_particles < 0:
            raise ValidationError("max_iter, output_every and threads must be >= 1; n_particles >= 0")
        if self.deposition_order != 1:
            raise ValidationError("only deposition_order = 1 (cloud-in-cell) is implemented")
        if not (self.kappa > 0.0 and self.nu > 0.0):
            raise ValidationError("kappa and nu must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        steps = self.t_end / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValidationError("t_end must be an integer multiple of dt")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class SimState:
    time: float
    step: int
    particles: ParticleEnsemble
    fluid: FluidField


DIAGNOSTIC_FIELDS = ("step", "time", "momentum_x", "momentum_y", "momentum_z",
                     "relative_kinetic_energy", "max_fluid_speed", "stokes_residual",
                     "iterations", "total_weight")


def frozen_field(config: SimConfig) -> FluidField:
    """Uniform gas velocity, used when the coupling is switched off."""
    n = config.grid
    u0 = np.asarray(config.frozen_velocity, dtype=float)
    velocity = np.broadcast_to(u0[:, None, None, None], (3, n, n, n)).copy()
    spectrum = np.zeros((3, n, n, n // 2 + 1), dtype=complex)
    spectrum[:, 0, 0, 0] = u0 * n ** 3
    return FluidField(velocity, spectrum, np.zeros((n, n, n)), config.nu, config.kappa)


def solve_fluid(particles: ParticleEnsemble, config: SimConfig,
                previous: FluidField | None = None) -> FluidField:
    if not config.coupling:
        return previous if previous is not None else frozen_field(config)
    rho, flux = deposit_moments(particles, config.grid, config.threads)
    guess = None if previous is None else previous.velocity
    return stokes_solve(rho, flux, config.nu, config.kappa, guess, config.tol, config.max_iter,
                        config.shift, config.threads)


def initial_state(config: SimConfig, particles: ParticleEnsemble | None = None) -> SimState:
    if particles is None:
        rng = np.random.default_rng(config.seed)
        particles = sample_ensemble(rng, config.n_particles, config.position, config.velocity,
                                    config.total_weight)
    return SimState(0.0, 0, particles, solve_fluid(particles, config))


def _half_drift(particles: ParticleEnsemble, dt: float) -> None:
    if len(particles):
        kernels.drift(particles.positions, particles.velocities, 0.5 * dt)


def step(state: SimState, config: SimConfig) -> SimState:
    """Advance one dt; the incoming state is left untouched."""
    p = state.particles.copy()
    dt = config.dt
    decay = math.exp(-config.kappa * dt)
    _half_drift(p, dt)
    fluid = solve_fluid(p, config, state.fluid)
    if len(p):
        u_at = interpolate_velocity(fluid.velocity, p.positions, config.threads)
        if config.coupling and config.corrector:
            trial = ParticleEnsemble(p.positions, p.velocities.copy(), p.weights)
            kernels.kick(trial.velocities, u_at, decay)
            fluid = solve_fluid(trial, config, fluid)
            u_at = 0.5 * (u_at + interpolate_velocity(fluid.velocity, p.positions, config.threads))
        kernels.kick(p.velocities, u_at, decay)
    _half_drift(p, dt)
    return SimState(state.time + dt, state.step + 1, p, fluid)


def diagnostics(state: SimState, config: SimConfig) -> dict:
    p = state.particles
    if len(p):
        u_at = interpolate_velocity(state.fluid.velocity, p.positions, config.threads)
        rel = float(np.sum(p.weights * np.sum((p.velocities - u_at) ** 2, axis=1)))
    else:
        rel = 0.0
    mom = p.momentum
    return {
        "step": state.step,
        "time": state.time,
        "momentum_x": float(mom[0]),
        "momentum_y": float(mom[1]),
        "momentum_z": float(mom[2]),
        "relative_kinetic_energy": rel,
        "max_fluid_speed": state.fluid.max_speed(),
        "stokes_residual": state.fluid.residual,
        "iterations": state.fluid.iterations,
        "total_weight": p.total_weight,
    }


def run(config: SimConfig, particles: ParticleEnsemble | None = None,
        out_dir: str | Path | None = None, on_output=None) -> list[dict]:
    """Integrate to t_end, recording diagnostics every output_every steps.

    on_output(state, row) is called at each output step. If a step fails and
    out_dir is given, the last valid state is written to abort_state.npz
    before the error propagates.
    """
    state = initial_state(config, particles)
    rows = [diagnostics(state, config)]
    if on_output:
        on_output(state, rows[-1])
    for _ in range(config.n_steps):
        try:
            new = step(state, config)
        except AerokinError:
            if out_dir is not None:
                dump_state(Path(out_dir) / "abort_state.npz", state)
            log.error("step %d failed; last valid time %.6g", state.step + 1, state.time)
            raise
        state = new
        if state.step % config.output_every == 0 or state.step == config.n_steps:
            rows.append(diagnostics(state, config))
            if on_output:
                on_output(state, rows[-1])
    return rows


def dump_state(path: Path, state: SimState) -> None:
    p = state.particles
    np.savez(path, time=state.time, step=state.step, positions=p.positions,
             velocities=p.velocities, weights=p.weights, velocity_field=state.fluid.velocity)
