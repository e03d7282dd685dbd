"""Velocity distributions used as inputs to the collision integrals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError
from .gas import maxwellian


@dataclass(frozen=True)
class GaussianMixture:
    """Sum of isotropic Gaussians: sum_k weight_k N(v; mean_k, sigma_k^2 I)."""

    weights: tuple[float, ...]
    means: tuple[tuple[float, float, float], ...]
    sigmas: tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        m = np.asarray(self.means, dtype=float)
        s = np.asarray(self.sigmas, dtype=float)
        if w.ndim != 1 or m.shape != (len(w), 3) or s.shape != w.shape or len(w) == 0:
            raise ValidationError("mixture needs matching weights (k,), means (k,3), sigmas (k,)")
        if np.any(s <= 0.0) or not np.all(np.isfinite(np.concatenate([w, m.ravel(), s]))):
            raise ValidationError("mixture widths must be positive and all entries finite")

    @classmethod
    def single(cls, mean=(0.0, 0.0, 0.0), sigma: float = 1.0, weight: float = 1.0) -> "GaussianMixture":
        return cls((float(weight),), (tuple(float(x) for x in mean),), (float(sigma),))

    def scaled(self, factor: float) -> "GaussianMixture":
        return GaussianMixture(tuple(factor * w for w in self.weights), self.means, self.sigmas)

    def components(self):
        for w, m, s in zip(self.weights, self.means, self.sigmas):
            yield float(w), np.asarray(m, dtype=float), float(s)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = np.zeros(v.shape[:-1])
        for w, m, s in self.components():
            d = v - m
            out = out + w * (2.0 * np.pi * s * s) ** -1.5 * np.exp(
                -0.5 * np.einsum("...i,...i->...", d, d) / (s * s))
        return out

    def gradient(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = np.zeros(v.shape)
        for w, m, s in self.components():
            d = v - m
            g = w * (2.0 * np.pi * s * s) ** -1.5 * np.exp(
                -0.5 * np.einsum("...i,...i->...", d, d) / (s * s))
            out = out - g[..., None] * d / (s * s)
        return out

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def momentum(self) -> np.ndarray:
        return np.asarray(self.weights) @ np.asarray(self.means)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw n velocities from the normalized mixture (weights must be positive)."""
        w = np.asarray(self.weights, dtype=float)
        if np.any(w <= 0.0):
            raise ValidationError("sampling needs positive mixture weights")
        idx = rng.choice(len(w), size=n, p=w / w.sum())
        means = np.asarray(self.means)[idx]
        sig = np.asarray(self.sigmas)[idx]
        return means + sig[:, None] * rng.standard_normal((n, 3))


@dataclass(frozen=True)
class HydrodynamicFluctuation:
    """g(w) = rho + u.w + theta (|w|^2 - 3)/2, the kernel-space fluctuation."""

    rho: float = 0.0
    velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)
    theta: float = 0.0

    def __call__(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        u = np.asarray(self.velocity, dtype=float)
        return (self.rho + w @ u
                + 0.5 * self.theta * (np.einsum("...i,...i->...", w, w) - 3.0))


@dataclass(frozen=True)
class PerturbedMaxwellian:
    """f(w) = M(w) (1 + scale * g(w))."""

    scale: float = 0.0
    fluctuation: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, w: np.ndarray) -> np.ndarray:
        m = maxwellian(w)
        if self.fluctuation is None or self.scale == 0.0:
            return m
        return m * (1.0 + self.scale * self.fluctuation(w))
