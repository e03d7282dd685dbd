"""Quadrature rules on R^3 and on the unit sphere.

Two velocity rules are provided. The tensor Gauss-Hermite rule is exact for
polynomial moments against the Maxwellian. The spherical Maxwell rule pairs a
Gauss rule in the speed for the weight r^2 exp(-r^2/2) with a Lebedev rule on
the sphere, which handles integrands that are smooth in |w| but not
polynomial (for example |w|^3).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.integrate import lebedev_rule
from scipy.linalg import eigh_tridiagonal
from scipy.special import roots_genlaguerre

from .errors import ValidationError

MAXWELL_NORM = (2.0 * np.pi) ** -1.5


@dataclass(frozen=True)
class VelocityQuadrature:
    """Nodes in R^3 with Lebesgue weights: sum(weights * h(nodes)) ~ int h dw."""

    nodes: np.ndarray
    weights: np.ndarray
    radial_cutoff: float

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Integrate sampled values; the leading axis runs over the nodes."""
        values = np.asarray(values, dtype=float)
        w = self.weights.reshape((-1,) + (1,) * (values.ndim - 1))
        return np.sum(w * values, axis=0)

    def maxwell_weights(self) -> np.ndarray:
        """Weights for integrals against the standard Maxwellian."""
        r2 = np.einsum("ij,ij->i", self.nodes, self.nodes)
        return self.weights * MAXWELL_NORM * np.exp(-0.5 * r2)

    def __len__(self) -> int:
        return len(self.weights)


def gauss_hermite(n: int = 24) -> VelocityQuadrature:
    """Tensor Gauss-Hermite rule with n nodes per axis."""
    if n < 1:
        raise ValidationError("number of Gauss-Hermite nodes must be positive")
    return _gauss_hermite_cached(int(n))


@lru_cache(maxsize=16)
def _gauss_hermite_cached(n: int) -> VelocityQuadrature:
    x, wx = hermegauss(n)
    # hermegauss integrates against exp(-x^2/2); convert to Lebesgue weights.
    wx = wx * np.exp(0.5 * x * x)
    g = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3)
    w = (wx[:, None, None] * wx[None, :, None] * wx[None, None, :]).reshape(-1)
    g.setflags(write=False)
    w.setflags(write=False)
    return VelocityQuadrature(g, w, float(np.sqrt(3.0) * np.max(np.abs(x))))


def lebedev(order: int = 41) -> tuple[np.ndarray, np.ndarray]:
    """Lebedev directions (n, 3) and weights summing to 4 pi."""
    return _lebedev_cached(int(order))


@lru_cache(maxsize=16)
def _lebedev_cached(order: int) -> tuple[np.ndarray, np.ndarray]:
    try:
        pts, wts = lebedev_rule(order)
    except (ValueError, NotImplementedError) as exc:
        raise ValidationError(f"no Lebedev rule of order {order}") from exc
    pts = np.ascontiguousarray(pts.T)
    wts = np.asarray(wts, dtype=float)
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


@lru_cache(maxsize=32)
def maxwell_radial_rule(n: int, power: int = 2, cutoff: float = 14.0, panels: int = 56,
                        per_panel: int = 24) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule with sum(w * p(r)) = int_0^inf p(r) r^power exp(-r^2/2) dr.

    Built by the discretized Stieltjes procedure on a composite Gauss-Legendre
    discretization of [0, cutoff], followed by Golub-Welsch.
    """
    if n < 1:
        raise ValidationError("radial rule needs at least one node")
    xs, ws = gauss_legendre(per_panel, 0.0, 1.0)
    edges = np.linspace(0.0, cutoff, panels + 1)
    h = np.diff(edges)
    t = (edges[:-1, None] + h[:, None] * xs[None, :]).ravel()
    mu = (h[:, None] * ws[None, :]).ravel() * t ** power * np.exp(-0.5 * t * t)

    total = float(np.sum(mu))
    alpha = np.zeros(n)
    offdiag = np.zeros(max(n - 1, 0))
    p_prev = np.zeros_like(t)
    p = np.full_like(t, 1.0 / np.sqrt(total))
    for k in range(n):
        alpha[k] = np.sum(mu * t * p * p)
        if k == n - 1:
            break
        q = (t - alpha[k]) * p - (offdiag[k - 1] * p_prev if k > 0 else 0.0)
        offdiag[k] = np.sqrt(np.sum(mu * q * q))
        p_prev, p = p, q / offdiag[k]
    nodes, vecs = eigh_tridiagonal(alpha, offdiag)
    weights = total * vecs[0, :] ** 2
    return nodes, weights


def gaussian_speed_rule(n: int, scale: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and Lebesgue weights on [0, inf) for integrands ~ r^3 exp(-r^2/(2 scale^2)).

    Gauss rule for the weight r^3 exp(-r^2/2), rescaled: exact for
    r^3 exp(-r^2/(2 scale^2)) p(r) with p a polynomial of degree < 2n.
    """
    r, w = maxwell_radial_rule(n, power=3)
    return scale * r, scale * w * np.exp(0.5 * r * r) / r ** 3


def maxwell_spherical(n_radial: int = 32, sphere_order: int = 41) -> VelocityQuadrature:
    """Spherical product rule: radial Maxwell Gauss rule times Lebedev."""
    return _maxwell_spherical_cached(int(n_radial), int(sphere_order))


@lru_cache(maxsize=16)
def _maxwell_spherical_cached(n_radial: int, sphere_order: int) -> VelocityQuadrature:
    r, wr = maxwell_radial_rule(n_radial)
    dirs, wd = lebedev(sphere_order)
    nodes = (r[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    # Undo the Gaussian factor so the weights are Lebesgue weights.
    weights = ((wr * np.exp(0.5 * r * r))[:, None] * wd[None, :]).ravel()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return VelocityQuadrature(nodes, weights, float(r[-1]))


def frame_from_axis(axis: np.ndarray) -> np.ndarray:
    """Rotation matrices whose third column is the unit vector along axis.

    Works on (..., 3) input; zero vectors get the identity frame.
    """
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis, axis=-1, keepdims=True)
    safe = np.where(norm > 0.0, norm, 1.0)
    e3 = np.where(norm > 0.0, axis / safe, np.array([0.0, 0.0, 1.0]))
    # Householder-free construction (Duff et al. branchless basis).
    sign = np.where(e3[..., 2] >= 0.0, 1.0, -1.0)
    a = -1.0 / (sign + e3[..., 2])
    b = e3[..., 0] * e3[..., 1] * a
    e1 = np.stack([1.0 + sign * e3[..., 0] ** 2 * a, sign * b, -sign * e3[..., 0]], axis=-1)
    e2 = np.stack([b, sign + e3[..., 1] ** 2 * a, -e3[..., 1]], axis=-1)
    return np.stack([e1, e2, e3], axis=-1)


@dataclass(frozen=True)
class SphericalGrid:
    """Product grid in spherical coordinates about a polar axis.

    Radii use Gauss-Legendre on [r_min, r_max]; the polar angle uses
    Gauss-Legendre in theta itself (the integrand carries sin theta), which
    keeps integrands that are smooth in theta, but not in cos theta, spectrally
    accurate. The azimuth uses the trapezoidal rule.
    """

    radii: np.ndarray
    radial_weights: np.ndarray
    thetas: np.ndarray
    theta_weights: np.ndarray
    phis: np.ndarray
    phi_weight: float

    @classmethod
    def with_radial(cls, radii: np.ndarray, radial_weights: np.ndarray, n_theta: int,
                    n_phi: int, theta_max: float = np.pi) -> "SphericalGrid":
        th, wth = gauss_legendre(n_theta, 0.0, theta_max)
        phi = 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
        return cls(np.asarray(radii), np.asarray(radial_weights), th, wth, phi,
                   2.0 * np.pi / n_phi)

    @classmethod
    def build(cls, n_r: int, r_max: float, n_theta: int, n_phi: int,
              r_min: float = 0.0, theta_max: float = np.pi) -> "SphericalGrid":
        r, wr = gauss_legendre(n_r, r_min, r_max)
        return cls.with_radial(r, wr, n_theta, n_phi, theta_max)

    def local_points(self) -> tuple[np.ndarray, np.ndarray]:
        """Points in the local frame (polar axis e3) and Lebesgue weights."""
        r = self.radii[:, None, None]
        th = self.thetas[None, :, None]
        ph = self.phis[None, None, :]
        st = np.sin(th)
        pts = np.stack(np.broadcast_arrays(r * st * np.cos(ph), r * st * np.sin(ph),
                                           r * np.cos(th)), axis=-1).reshape(-1, 3)
        w = (self.radial_weights[:, None, None] * self.radii[:, None, None] ** 2
             * self.theta_weights[None, :, None] * st
             * self.phi_weight * np.ones_like(ph))
        return pts, w.reshape(-1)

    def unit_directions(self) -> tuple[np.ndarray, np.ndarray]:
        """Directions and solid-angle weights (summing to 4 pi)."""
        th = self.thetas[:, None]
        ph = self.phis[None, :]
        st = np.sin(th)
        d = np.stack(np.broadcast_arrays(st * np.cos(ph), st * np.sin(ph), np.cos(th)),
                     axis=-1).reshape(-1, 3)
        w = (self.theta_weights[:, None] * st * self.phi_weight * np.ones_like(ph)).reshape(-1)
        return d, w

    def oriented(self, axis: np.ndarray, centre: np.ndarray | None = None):
        """Grid points rotated so the polar axis follows axis, shifted by centre.

        axis has shape (..., 3); the result has shape (..., n, 3).
        """
        pts, w = self.local_points()
        rot = frame_from_axis(axis)
        out = np.einsum("...ij,nj->...ni", rot, pts)
        if centre is not None:
            out = out + np.asarray(centre)[..., None, :]
        return out, w
