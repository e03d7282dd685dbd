"""Weighted particles on the unit torus and their coupling to the grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .distributions import GaussianMixture
from .errors import ValidationError


@dataclass
class ParticleEnsemble:
    positions: np.ndarray
    velocities: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.positions = np.ascontiguousarray(self.positions, dtype=np.float64).reshape(-1, 3)
        self.velocities = np.ascontiguousarray(self.velocities, dtype=np.float64).reshape(-1, 3)
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64).reshape(-1)
        n = len(self.weights)
        if self.positions.shape != (n, 3) or self.velocities.shape != (n, 3):
            raise ValidationError("positions, velocities and weights must describe the same particles")
        if np.any(self.weights <= 0.0):
            raise ValidationError("particle weights must be positive")
        if n and (np.any(self.positions < 0.0) or np.any(self.positions >= 1.0)):
            raise ValidationError("positions must lie in [0, 1)^3")

    def __len__(self) -> int:
        return len(self.weights)

    def copy(self) -> "ParticleEnsemble":
        return ParticleEnsemble(self.positions.copy(), self.velocities.copy(), self.weights.copy())

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    @property
    def momentum(self) -> np.ndarray:
        return self.weights @ self.velocities if len(self) else np.zeros(3)

    @classmethod
    def empty(cls) -> "ParticleEnsemble":
        return cls(np.zeros((0, 3)), np.zeros((0, 3)), np.zeros(0))


def wrap(x: np.ndarray) -> np.ndarray:
    """Map to [0, 1) componentwise."""
    out = np.asarray(x, dtype=float) % 1.0
    out[out >= 1.0] = 0.0
    return out


def sample_ensemble(rng: np.random.Generator, n: int, position: GaussianMixture,
                    velocity: GaussianMixture, total_weight: float = 1.0) -> ParticleEnsemble:
    """n equal-weight particles with independent position and velocity draws.

    Positions are wrapped onto the torus.
    """
    if n < 0 or not total_weight > 0.0:
        raise ValidationError("need n >= 0 particles and a positive total weight")
    if n == 0:
        return ParticleEnsemble.empty()
    x = wrap(position.sample(rng, n))
    v = velocity.sample(rng, n)
    return ParticleEnsemble(x, v, np.full(n, total_weight / n))


def deposit_moments(particles: ParticleEnsemble, n: int, threads: int = 1):
    """Cloud-in-cell density rho (N,N,N) and flux j (3,N,N,N), per unit volume.

    sum(rho) / N^3 equals the total particle weight.
    """
    if len(particles) == 0:
        return np.zeros((n, n, n)), np.zeros((3, n, n, n))
    mass, flux = kernels.deposit(particles.positions, particles.velocities, particles.weights,
                                 n, threads)
    scale = float(n) ** 3
    return (mass * scale).reshape(n, n, n), (flux * scale).reshape(3, n, n, n)


def interpolate_velocity(velocity: np.ndarray, x: np.ndarray, threads: int = 1) -> np.ndarray:
    """Trilinear periodic interpolation of a (3,N,N,N) field at positions (m,3)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if len(x) == 0:
        return np.zeros((0, 3))
    n = velocity.shape[1]
    return kernels.gather(velocity.reshape(3, -1), x, n, threads)
