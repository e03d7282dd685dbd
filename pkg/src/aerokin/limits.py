"""Transport coefficients and the operator limits behind the Stokes limit.

The three limit curves compare collision integrals at finite (eps, eta, mu)
with their predicted limits:

- deflection: D(F, M(1 + eps g)) / eta  ->  kappa div_v((v - u) F)
- friction:   (1/eps) int w R dw        ->  kappa (j_F - u rho_F)
- flux:       (1/mu) int A~ R dw        ->  0
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .collision import (DEFAULT_RESOLUTION, KernelMoments, Resolution, apply_D,
                        weak_moments_R, weak_transfer_R)
from .distributions import GaussianMixture, HydrodynamicFluctuation, PerturbedMaxwellian
from .errors import QuadratureError, ValidationError
from .gas import GasModel, a_tilde, viscosity
from .quadrature import VelocityQuadrature, gauss_hermite, gauss_legendre, maxwell_spherical
from .scaling import ScalingTriple, admissible_sequence, check_sequence


def kappa(moments: KernelMoments, quad: VelocityQuadrature | None = None) -> float:
    """kappa = (1/3) int Q(|w|) |w|^2 M(w) dw."""
    quad = quad or maxwell_spherical(24, 17)
    r = np.linalg.norm(quad.nodes, axis=-1)
    value = float(np.sum(quad.maxwell_weights() * moments.Q(r) * r * r)) / 3.0
    if not value > 0.0:
        raise QuadratureError(f"kappa must be positive, got {value}", value=value)
    return value


@dataclass(frozen=True)
class FluctuationField:
    """Gas fluctuation g(w) with its hydrodynamic moments."""

    g: Callable[[np.ndarray], np.ndarray]

    def moments(self, quad: VelocityQuadrature | None = None):
        return hydrodynamic_projection(self.g, quad)

    def reconstruct(self, quad: VelocityQuadrature | None = None) -> HydrodynamicFluctuation:
        rho, u, theta = self.moments(quad)
        return HydrodynamicFluctuation(rho, tuple(u), theta)


def hydrodynamic_projection(g: Callable, quad: VelocityQuadrature | None = None):
    """(rho, u, theta) = (int g M, int w g M, int (|w|^2/3 - 1) g M)."""
    if isinstance(g, FluctuationField):
        g = g.g
    quad = quad or gauss_hermite(24)
    wm = quad.maxwell_weights()
    w = quad.nodes
    vals = np.asarray(g(w), dtype=float)
    rho = float(np.sum(wm * vals))
    u = np.sum((wm * vals)[:, None] * w, axis=0)
    theta = float(np.sum(wm * vals * (np.einsum("ni,ni->n", w, w) / 3.0 - 1.0)))
    return rho, u, theta


def viscous_flux_identity(grad_u: np.ndarray, model: GasModel,
                          quad: VelocityQuadrature | None = None):
    """Both sides of int A~(w) (w . grad_x g) M dw = nu (grad u + grad u^T).

    grad_u[..., i, j] is d u_j / d x_i for g = rho + u.w + theta (|w|^2 - 3)/2;
    only u contributes to the left side. Returns (lhs, rhs), each (..., 3, 3).
    """
    quad = quad or gauss_hermite(24)
    grad_u = np.asarray(grad_u, dtype=float)
    w = quad.nodes
    at = a_tilde(model, w)
    directional = np.einsum("ni,nj,...ij->...n", w, w, grad_u)
    lhs = np.einsum("n,nkl,...n->...kl", quad.maxwell_weights(), at, directional)
    rhs = viscosity(model, quad) * (grad_u + np.swapaxes(grad_u, -1, -2))
    return lhs, rhs


def shear_gradient(x: np.ndarray) -> np.ndarray:
    """Gradient of u(x) = (sin 2 pi x_2, 0, 0) at points x (..., 3)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1] + (3, 3))
    out[..., 1, 0] = 2.0 * np.pi * np.cos(2.0 * np.pi * x[..., 1])
    return out


@dataclass(frozen=True)
class LimitCurve:
    metric: str
    triples: tuple[ScalingTriple, ...]
    errors: tuple[float, ...]
    indices: tuple[int, ...] = ()
    values: tuple = ()

    def ratios(self) -> list[float]:
        e = self.errors
        return [b / a for a, b in zip(e, e[1:])]

    def strictly_decreasing(self, start: int = 0) -> bool:
        e = self.errors[start:]
        return all(b < a for a, b in zip(e, e[1:]))


def _mean_velocity(g) -> np.ndarray:
    if g is None:
        return np.zeros(3)
    if isinstance(g, HydrodynamicFluctuation):
        return np.asarray(g.velocity, dtype=float)
    return hydrodynamic_projection(g)[1]


def deflection_sequence(etas=(1e-1, 1e-2, 1e-3), exponent: float = 1.0 / 3.0):
    """Triples with eps = eta^exponent; mu plays no role and is set to 1."""
    return [ScalingTriple(float(eta) ** exponent, float(eta), 1.0) for eta in etas]


def deflection_target(F: GaussianMixture, u, kappa_value: float, v: np.ndarray,
                      step: float = 1e-2) -> np.ndarray:
    """kappa div_v((v - u) F) by fourth-order centred differences."""
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    out = np.zeros(v.shape[:-1])
    for i in range(3):
        e = np.zeros(3)
        e[i] = step

        def flux(x):
            return (x[..., i] - u[i]) * F(x)

        out += (-flux(v + 2 * e) + 8.0 * flux(v + e) - 8.0 * flux(v - e) + flux(v - 2 * e)) \
            / (12.0 * step)
    return kappa_value * out


def _is_radial(F: GaussianMixture, g) -> bool:
    comps = list(F.components())
    if len(comps) != 1 or np.any(comps[0][1] != 0.0):
        return False
    if g is None:
        return True
    return isinstance(g, HydrodynamicFluctuation) and not np.any(np.asarray(g.velocity))


def particle_grid(F: GaussianMixture, g=None, radial_nodes: int = 24, nodes: int = 8):
    """Velocity nodes and Lebesgue weights for L^2 norms over the particle velocity.

    A single centred component with isotropic g is rotation invariant, so a
    radial line suffices; otherwise scaled Gauss-Hermite nodes per component.
    """
    if _is_radial(F, g):
        sigma = F.sigmas[0]
        r, wr = gauss_legendre(radial_nodes, 0.0, 9.0 * sigma)
        pts = r[:, None] * np.array([0.0, 0.0, 1.0])
        return pts, 4.0 * np.pi * wr * r * r
    gh = gauss_hermite(nodes)
    pts, wts = [], []
    for _, m, s in F.components():
        pts.append(m + s * gh.nodes)
        wts.append(gh.weights * s ** 3 / len(F.weights))
    # Each component grid is a full rule on R^3; the union averages them.
    return np.concatenate(pts), np.concatenate(wts)


def deflection_limit(F: GaussianMixture, g, sequence, model, kappa_value: float | None = None,
                     grid=None, step: float = 1e-2,
                     res: Resolution = DEFAULT_RESOLUTION) -> LimitCurve:
    """Relative L^2 distance between D(F, M(1 + eps g))/eta and kappa div((v - u) F)."""
    check_sequence(sequence, require=("eta_over_eps2",))
    kappa_value = kappa(model.moments()) if kappa_value is None else kappa_value
    u = _mean_velocity(g)
    v, wv = grid if grid is not None else particle_grid(F, g)
    target = deflection_target(F, u, kappa_value, v, step)
    norm = float(np.sqrt(np.sum(wv * target * target)))
    errors, values = [], []
    for s in sequence:
        f = PerturbedMaxwellian(s.epsilon, g)
        value = apply_D(F, f, model, s, v, res) / s.eta
        dist = float(np.sqrt(np.sum(wv * (value - target) ** 2)))
        errors.append(dist / norm if norm > 0.0 else dist)
        values.append(value)
    return LimitCurve("deflection", tuple(sequence), tuple(errors), values=tuple(values))


def friction_limit(F: GaussianMixture, g, sequence, model, kappa_value: float | None = None,
                   res: Resolution = DEFAULT_RESOLUTION) -> LimitCurve:
    """Distance between (1/eps) int w R dw and kappa (j_F - u rho_F).

    Relative to |target| when the target is nonzero, absolute otherwise.
    """
    check_sequence(sequence, require=("eta_over_eps2",))
    kappa_value = kappa(model.moments()) if kappa_value is None else kappa_value
    u = _mean_velocity(g)
    target = kappa_value * (F.momentum - u * F.mass)
    norm = float(np.linalg.norm(target))
    errors, values = [], []
    for s in sequence:
        f = PerturbedMaxwellian(s.epsilon, g)
        _, r1, _ = weak_moments_R(f, F, model, s, res)
        value = r1 / s.epsilon
        dist = float(np.linalg.norm(value - target))
        errors.append(dist / norm if norm > 0.0 else dist)
        values.append(value)
    return LimitCurve("friction", tuple(sequence), tuple(errors), values=tuple(values))


def friction_flux_limit(F: GaussianMixture, g, sequence=None, model=None,
                        gas: GasModel | None = None, relaxed: bool = False,
                        res: Resolution = DEFAULT_RESOLUTION) -> LimitCurve:
    """mu^-1 || int A~(w) R(M(1 + eps g), F)(w) dw || (Frobenius norm).

    relaxed=True only demands eps/mu -> 0 in place of eps/mu^2 -> 0.
    """
    if model is None:
        raise ValidationError("a collision model is required")
    sequence = sequence or admissible_sequence(6)
    check_sequence(sequence, require=("eta_over_eps2", "eps_over_mu" if relaxed else "eps_over_mu2"))
    gas = gas or GasModel()
    errors, values = [], []
    for s in sequence:
        f = PerturbedMaxwellian(s.epsilon, g)
        if gas.is_tabulated:
            flux = weak_transfer_R(lambda w: a_tilde(gas, w), f, F, model, s, res)
        else:
            _, _, r2 = weak_moments_R(f, F, model, s, res)
            flux = gas.alpha * (r2 - np.trace(r2) * np.eye(3) / 3.0)
        values.append(flux / s.mu)
        errors.append(float(np.linalg.norm(flux)) / s.mu)
    return LimitCurve("friction_flux", tuple(sequence), tuple(errors), values=tuple(values))
