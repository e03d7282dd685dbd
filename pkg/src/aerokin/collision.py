"""Particle-gas collision models.

Two families are provided: elastic collisions with a cutoff hard-potential
cross-section (hard spheres as a special case) and the inelastic
diffuse-reflection model. Each exposes its kernels, the rate functions q and
Q, moment transfers against the collision measures, and the collision
integrals D (particle side) and R (gas side).

Inelastic integrals are computed in the variables

    a = eps V - W,   y = scaled offset from the centre-of-mass velocity,

in which both kernels become k(y) J(a, y) with k a centred Gaussian and J the
half-sphere moment. J is homogeneous in |a| and |y| and smooth in the angle
between them, so spherical grids in y aligned with a are spectrally accurate.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from .distributions import GaussianMixture
from .errors import QuadratureError, ValidationError
from .quadrature import (SphericalGrid, frame_from_axis, gauss_hermite, gauss_legendre,
                         gaussian_speed_rule, lebedev)
from .scaling import ScalingTriple

SQRT_2PI = float(np.sqrt(2.0 * np.pi))


# --------------------------------------------------------------------------
# Half-sphere moment


def half_moment_sphere(a: np.ndarray, b: np.ndarray, method: str = "closed",
                       order: int = 41) -> np.ndarray:
    """int_{S^2} (n.a)_+ (n.b)_+ dn over the last axis of a and b.

    method="closed" uses (2/3)(|a x b| + (pi - t) a.b), t the angle between a
    and b. method="lebedev" sums a Lebedev rule of the given order.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if method == "closed":
        cross = np.cross(a, b)
        sin_part = np.sqrt(np.einsum("...i,...i->...", cross, cross))
        cos_part = np.einsum("...i,...i->...", a, b)
        angle = np.arctan2(sin_part, cos_part)
        return np.maximum((2.0 / 3.0) * (sin_part + (np.pi - angle) * cos_part), 0.0)
    if method == "lebedev":
        dirs, wts = lebedev(order)
        pa = np.maximum(a @ dirs.T, 0.0)
        pb = np.maximum(b @ dirs.T, 0.0)
        return np.sum(wts * pa * pb, axis=-1)
    raise ValidationError(f"unknown half-sphere method {method!r}")


def half_moment_sphere_mc(a, b, n_samples: int = 10_000_000, seed: int = 0,
                          chunk: int = 1_000_000) -> tuple[float, float]:
    """Monte-Carlo estimate and standard error for a single pair (a, b)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        n = rng.standard_normal((m, 3))
        n /= np.linalg.norm(n, axis=1, keepdims=True)
        vals = 4.0 * np.pi * np.maximum(n @ a, 0.0) * np.maximum(n @ b, 0.0)
        total += float(np.sum(vals))
        total_sq += float(np.sum(vals * vals))
        done += m
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    return mean, float(np.sqrt(var / n_samples))


# --------------------------------------------------------------------------
# Rate functions


@dataclass(frozen=True)
class KernelMoments:
    """Collision rate q(r), momentum-transfer rate Q(r) and Q'(r)."""

    q: Callable[[np.ndarray], np.ndarray]
    Q: Callable[[np.ndarray], np.ndarray]
    dQ: Callable[[np.ndarray], np.ndarray]
    bound: float

    def satisfies_bounds(self, radii: np.ndarray | None = None) -> bool:
        r = np.linspace(0.0, 50.0, 501) if radii is None else np.asarray(radii, float)
        q = self.q(r)
        grow = self.bound * (1.0 + r)
        return bool(np.all(q >= 0.0) and np.all(q <= grow)
                    and np.all(self.Q(r) + np.abs(self.dQ(r)) <= grow))


def _central_difference(fn: Callable, r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    h = 1e-6 * np.maximum(1.0, r)
    lo = np.maximum(r - h, 0.0)
    return (fn(r + h) - fn(lo)) / (r + h - lo)


# --------------------------------------------------------------------------
# Models


@dataclass(frozen=True)
class InelasticDiffuse:
    """Diffuse reflection on the particle surface with parameter beta > 0."""

    beta: float = 1.0
    name: str = field(default="inelastic-diffuse", init=False)

    def __post_init__(self):
        if not (np.isfinite(self.beta) and self.beta > 0.0):
            raise ValidationError("beta must be positive")

    def moments(self) -> KernelMoments:
        return moments_inelastic(self.beta)


class SigmaTable:
    """Differential cross-section sigma(r, mu) from per-mu-node tables in r.

    Each mu node carries a table (r, value) interpolated by PCHIP in r, held
    constant beyond its ends. Across mu the node values are combined by
    Lagrange interpolation, which is exact for polynomials in mu of degree
    below the node count.
    """

    def __init__(self, mu_nodes, radii_per_node, values_per_node):
        self.mu_nodes = np.asarray(mu_nodes, dtype=float)
        if self.mu_nodes.ndim != 1 or len(self.mu_nodes) == 0:
            raise ValidationError("sigma table needs at least one mu node")
        if len(radii_per_node) != len(self.mu_nodes) or len(values_per_node) != len(self.mu_nodes):
            raise ValidationError("one (r, value) table is needed per mu node")
        self._interps = []
        self._ranges = []
        for r, v in zip(radii_per_node, values_per_node):
            r = np.asarray(r, dtype=float)
            v = np.asarray(v, dtype=float)
            if np.any(v < 0.0):
                raise ValidationError("cross-section tables must be non-negative")
            if len(r) == 1:
                self._interps.append(lambda x, c=float(v[0]): np.full(np.shape(x), c))
            else:
                self._interps.append(PchipInterpolator(r, v, extrapolate=False))
            self._ranges.append((float(r[0]), float(r[-1])))

    @classmethod
    def from_csv(cls, mu_nodes, paths) -> "SigmaTable":
        radii, values = [], []
        for path in paths:
            rows = []
            with open(path, newline="") as fh:
                for row in csv.reader(fh):
                    if not row or row[0].strip().startswith("#"):
                        continue
                    try:
                        rows.append((float(row[0]), float(row[1])))
                    except ValueError:
                        if rows:
                            raise ValidationError(f"bad row {row!r} in {path}") from None
            if not rows:
                raise ValidationError(f"no data rows in {path}")
            arr = np.asarray(rows)
            radii.append(arr[:, 0])
            values.append(arr[:, 1])
        return cls(mu_nodes, radii, values)

    def __call__(self, r, mu):
        r = np.asarray(r, dtype=float)
        mu = np.asarray(mu, dtype=float)
        shape = np.broadcast_shapes(r.shape, mu.shape)
        out = np.zeros(shape)
        nodes = self.mu_nodes
        for k, (interp, (lo, hi)) in enumerate(zip(self._interps, self._ranges)):
            vals = interp(np.clip(r, lo, hi))
            basis = np.ones(mu.shape)
            for j in range(len(nodes)):
                if j != k:
                    basis = basis * (mu - nodes[j]) / (nodes[k] - nodes[j])
            out = out + basis * vals
        return out


@dataclass(frozen=True)
class ElasticCutoff:
    """Elastic collisions with b(z, omega) = |z| sigma(|z|, |cos(z, omega)|)."""

    sigma: Callable[[np.ndarray, np.ndarray], np.ndarray]
    b_star: float = 2.0
    beta_star: float = 1.0
    mu_nodes: int = 32
    name: str = field(default="elastic-cutoff", init=False)

    def __post_init__(self):
        if not self.b_star > 1.0:
            raise ValidationError("b_star must exceed 1")
        if not 0.0 <= self.beta_star <= 1.0:
            raise ValidationError("beta_star must lie in [0, 1]")

    def cross_section(self, r, mu):
        return self.sigma(r, mu)

    def kernel(self, z: np.ndarray, omega: np.ndarray) -> np.ndarray:
        """b(z, omega) over the last axis, broadcasting z against omega."""
        r = np.linalg.norm(z, axis=-1)
        cosine = np.einsum("...i,...i->...", z, omega) / np.where(r > 0.0, r, 1.0)
        return r * self.cross_section(r, np.abs(cosine))

    def moments(self) -> KernelMoments:
        return moments_elastic(self)


@dataclass(frozen=True)
class ElasticHardSphere(ElasticCutoff):
    """Hard spheres: constant sigma; the default 1/(4 pi) gives q(r) = r."""

    sigma: Callable | None = None
    sigma_const: float = 1.0 / (4.0 * np.pi)
    b_star: float = 2.0
    beta_star: float = 1.0
    name: str = field(default="elastic-hard-sphere", init=False)

    def __post_init__(self):
        super().__post_init__()
        if not self.sigma_const > 0.0:
            raise ValidationError("sigma_const must be positive")

    def cross_section(self, r, mu):
        return np.full(np.broadcast_shapes(np.shape(r), np.shape(mu)), self.sigma_const)


CollisionModel = Union[InelasticDiffuse, ElasticCutoff]


def is_elastic(model) -> bool:
    return isinstance(model, ElasticCutoff)


def moments_inelastic(beta: float) -> KernelMoments:
    if not beta > 0.0:
        raise ValidationError("beta must be positive")
    offset = SQRT_2PI / (3.0 * beta)
    return KernelMoments(
        q=lambda r: np.asarray(r, dtype=float) * 1.0,
        Q=lambda r: offset + np.asarray(r, dtype=float),
        dQ=lambda r: np.ones(np.shape(r)),
        bound=max(1.0, offset + 1.0),
    )


def moments_elastic(model: ElasticCutoff) -> KernelMoments:
    """q(r) = 4 pi r int_0^1 sigma dmu, Q(r) = 8 pi r int_0^1 sigma mu^2 dmu."""
    mu, wmu = gauss_legendre(model.mu_nodes, 0.0, 1.0)

    def sampled(r):
        r = np.asarray(r, dtype=float)
        s = model.cross_section(r[..., None], mu)
        if np.any(s < 0.0):
            raise ValidationError("cross-section has negative samples")
        return r, s

    def q(r):
        r, s = sampled(r)
        return 4.0 * np.pi * r * np.sum(wmu * s, axis=-1)

    def Q(r):
        r, s = sampled(r)
        return 8.0 * np.pi * r * np.sum(wmu * mu * mu * s, axis=-1)

    radii = np.linspace(0.0, 50.0, 201)
    bound = float(np.max(np.maximum(q(radii), Q(radii) + np.abs(_central_difference(Q, radii)))
                         / (1.0 + radii)))
    return KernelMoments(q=q, Q=Q, dQ=lambda r: _central_difference(Q, r), bound=max(bound, 1.0))


def check_kernel_bounds(model: ElasticCutoff, radii: np.ndarray | None = None,
                        order: int = 41) -> bool:
    """Sample check of 0 < b <= b*(1+|z|)^beta* and int b domega >= |z|/(b*(1+|z|))."""
    radii = np.linspace(0.05, 20.0, 60) if radii is None else np.asarray(radii, float)
    dirs, wts = lebedev(order)
    z = radii[:, None, None] * np.array([0.0, 0.0, 1.0])
    b = model.kernel(z, dirs[None, :, :])
    upper = model.b_star * (1.0 + radii[:, None]) ** model.beta_star
    total = np.sum(wts * b, axis=-1)
    return bool(np.all(b > 0.0) and np.all(b <= upper)
                and np.all(total >= radii / (model.b_star * (1.0 + radii))))


# --------------------------------------------------------------------------
# Elastic collision map


def elastic_post_velocities(v, w, omega, s: ScalingTriple):
    """Post-collision (v'', w'') for particle velocity v and molecule velocity w."""
    eps, eta = s.epsilon, s.eta
    if eps == 0.0:
        raise ValidationError("epsilon must be nonzero")
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    omega = np.asarray(omega, dtype=float)
    proj_v = np.einsum("...i,...i->...", v - w / eps, omega)[..., None]
    proj_w = np.einsum("...i,...i->...", w - eps * v, omega)[..., None]
    v_post = v - (2.0 * eta / (1.0 + eta)) * proj_v * omega
    w_post = w - (2.0 / (1.0 + eta)) * proj_w * omega
    return v_post, w_post


# --------------------------------------------------------------------------
# Inelastic kernels


def _centre_velocity(V, W, s):
    return (s.epsilon * V + s.eta * W) / (1.0 + s.eta)


def kernel_K_pg(v, V, W, s: ScalingTriple, beta: float) -> np.ndarray:
    """Particle-side inelastic kernel density in (V, W) for fixed v."""
    v, V, W = (np.asarray(x, dtype=float) for x in (v, V, W))
    eps, eta = s.epsilon, s.eta
    c = _centre_velocity(V, W, s)
    d = eps * v - c
    ratio = (1.0 + eta) / eta
    pref = ratio ** 4 * beta ** 4 * eps ** 3 / (2.0 * np.pi ** 2)
    gauss = np.exp(-0.5 * beta ** 2 * ratio ** 2 * np.einsum("...i,...i->...", d, d))
    return pref * gauss * half_moment_sphere(eps * V - W, c - eps * v)


def kernel_K_gp(w, V, W, s: ScalingTriple, beta: float) -> np.ndarray:
    """Gas-side inelastic kernel density in (V, W) for fixed w."""
    w, V, W = (np.asarray(x, dtype=float) for x in (w, V, W))
    eta = s.eta
    c = _centre_velocity(V, W, s)
    d = w - c
    pref = (1.0 + eta) ** 4 * beta ** 4 / (2.0 * np.pi ** 2)
    gauss = np.exp(-0.5 * beta ** 2 * (1.0 + eta) ** 2 * np.einsum("...i,...i->...", d, d))
    return pref * gauss * half_moment_sphere(s.epsilon * V - W, d)


def offset_density(y: np.ndarray, a: np.ndarray, beta: float) -> np.ndarray:
    """k(y) J(a, y): common form of both inelastic kernels in offset variables."""
    y2 = np.einsum("...i,...i->...", y, y)
    return (beta ** 4 / (2.0 * np.pi ** 2)) * np.exp(-0.5 * beta * beta * y2) \
        * half_moment_sphere(a, y)


# --------------------------------------------------------------------------
# Resolution of the internal grids


@dataclass(frozen=True)
class Resolution:
    """Node counts of the grids used by the collision integrals.

    offset_*: spherical grid in the inelastic offset variable y.
    relative_*: spherical grid in the relative velocity a = eps V - W.
    sphere_order: Lebedev order for the elastic impact direction.
    particle_nodes: Gauss-Hermite nodes per axis for each mixture component.
    patch_*: spherical patch around each mixture component used by apply_R.
    """

    offset_radial: int = 10
    offset_theta: int = 12
    offset_phi: int = 8
    relative_radial: int = 16
    relative_theta: int = 12
    relative_phi: int = 10
    sphere_order: int = 41
    particle_nodes: int = 10
    patch_radial: int = 20
    patch_theta: int = 20
    patch_phi: int = 12
    support_sigmas: float = 8.0
    mass_tolerance: float = 1e-4


DEFAULT_RESOLUTION = Resolution()


@lru_cache(maxsize=32)
def _offset_grid(beta: float, n_r: int, n_theta: int, n_phi: int):
    r, wr = gaussian_speed_rule(n_r, 1.0 / beta)
    return SphericalGrid.with_radial(r, wr, n_theta, n_phi).local_points()


@lru_cache(maxsize=32)
def _relative_grid(n_r: int, n_theta: int, n_phi: int):
    r, wr = gaussian_speed_rule(n_r, 1.0)
    return SphericalGrid.with_radial(r, wr, n_theta, n_phi).local_points()


def _oriented(points: np.ndarray, axis: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,nj->...ni", frame_from_axis(axis), points)


def _pairs(V, W):
    V = np.atleast_2d(np.asarray(V, dtype=float))
    W = np.atleast_2d(np.asarray(W, dtype=float))
    V, W = np.broadcast_arrays(V, W)
    return V, W


def _weighted_sum(weights: np.ndarray, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    extra = values.ndim - weights.ndim
    return np.sum(weights.reshape(weights.shape + (1,) * extra) * values, axis=1)


# --------------------------------------------------------------------------
# Moment transfers against the collision measures


def pg_transfer(model, phi: Callable, V, W, s: ScalingTriple,
                res: Resolution = DEFAULT_RESOLUTION) -> np.ndarray:
    """int phi(v) Pi_pg(v, dV dW) dv as a density at each pair (V, W).

    For the inelastic model the kernel is evaluated as written on a grid in v
    adapted to its Gaussian and half-sphere structure.
    """
    V, W = _pairs(V, W)
    eps, eta = s.epsilon, s.eta
    a = eps * V - W
    if is_elastic(model):
        dirs, wts = lebedev(res.sphere_order)
        b = model.kernel(a[:, None, :], dirs[None, :, :])
        proj = np.einsum("pi,ni->pn", V - W / eps, dirs)
        v_post = V[:, None, :] - (2.0 * eta / (1.0 + eta)) * proj[..., None] * dirs[None]
        return _weighted_sum(wts * b, phi(v_post))
    pts, wy = _offset_grid(model.beta, res.offset_radial, res.offset_theta, res.offset_phi)
    Y = _oriented(pts, a)
    c = _centre_velocity(V, W, s)
    v = (c[:, None, :] - (eta / (1.0 + eta)) * Y) / eps
    dv = (eta / ((1.0 + eta) * eps)) ** 3 * wy
    K = kernel_K_pg(v, V[:, None, :], W[:, None, :], s, model.beta)
    return _weighted_sum(K * dv, phi(v))


def gp_transfer(model, psi: Callable, V, W, s: ScalingTriple,
                res: Resolution = DEFAULT_RESOLUTION) -> np.ndarray:
    """int psi(w) Pi_gp(w, dV dW) dw as a density at each pair (V, W)."""
    V, W = _pairs(V, W)
    eps, eta = s.epsilon, s.eta
    a = eps * V - W
    if is_elastic(model):
        dirs, wts = lebedev(res.sphere_order)
        b = model.kernel(a[:, None, :], dirs[None, :, :])
        proj = np.einsum("pi,ni->pn", W - eps * V, dirs)
        w_post = W[:, None, :] - (2.0 / (1.0 + eta)) * proj[..., None] * dirs[None]
        return _weighted_sum(wts * b, psi(w_post))
    pts, wy = _offset_grid(model.beta, res.offset_radial, res.offset_theta, res.offset_phi)
    Y = _oriented(pts, a)
    c = _centre_velocity(V, W, s)
    w = c[:, None, :] + Y / (1.0 + eta)
    dw = wy / (1.0 + eta) ** 3
    K = kernel_K_gp(w, V[:, None, :], W[:, None, :], s, model.beta)
    return _weighted_sum(K * dw, psi(w))


@lru_cache(maxsize=32)
def _reference_offset_moments(beta: float, n_r: int, n_theta: int, n_phi: int):
    """Zeroth, first and second y-moments of k(y) J(e3, y), computed by quadrature."""
    pts, wy = _offset_grid(beta, n_r, n_theta, n_phi)
    dens = wy * offset_density(pts, np.array([0.0, 0.0, 1.0]), beta)
    m0 = float(np.sum(dens))
    m1 = np.sum(dens[:, None] * pts, axis=0)
    m2 = np.einsum("n,ni,nj->ij", dens, pts, pts)
    return m0, m1, m2


def offset_moments(a: np.ndarray, beta: float, res: Resolution = DEFAULT_RESOLUTION):
    """y-moments of k(y) J(a, y) for each a, from the reference moments at a = e3.

    Uses homogeneity of degree one in |a| and rotation equivariance.
    """
    a = np.asarray(a, dtype=float)
    m0r, m1r, m2r = _reference_offset_moments(beta, res.offset_radial,
                                              res.offset_theta, res.offset_phi)
    size = np.linalg.norm(a, axis=-1)
    rot = frame_from_axis(a)
    m0 = size * m0r
    m1 = size[..., None] * np.einsum("...ij,j->...i", rot, m1r)
    m2 = size[..., None, None] * np.einsum("...ij,jk,...lk->...il", rot, m2r, rot)
    return m0, m1, m2


def gp_moments(model, V, W, s: ScalingTriple, res: Resolution = DEFAULT_RESOLUTION):
    """(int Pi_gp dw, int w Pi_gp dw, int w w^T Pi_gp dw) at each pair (V, W)."""
    V, W = _pairs(V, W)
    return gp_moments_raw(model, V, W, s.epsilon, s.eta, res)


def gp_moments_raw(model, V, W, eps: float, eta: float,
                   res: Resolution = DEFAULT_RESOLUTION):
    """gp_moments for plain (eps, eta), allowing the limit eps = eta = 0."""
    a = eps * V - W
    if is_elastic(model):
        return _elastic_moments(model, W, a, a, -2.0 / (1.0 + eta), res)
    m0y, m1y, m2y = offset_moments(a, model.beta, res)
    c = (eps * V + eta * W) / (1.0 + eta)
    k = 1.0 / (1.0 + eta)
    m1 = c * m0y[:, None] + k * m1y
    cm = c[:, :, None] * m1y[:, None, :]
    m2 = (m0y[:, None, None] * c[:, :, None] * c[:, None, :]
          + k * (cm + np.swapaxes(cm, 1, 2)) + k * k * m2y)
    return m0y, m1, m2


def pg_moments(model, V, W, s: ScalingTriple, res: Resolution = DEFAULT_RESOLUTION):
    """(int Pi_pg dv, int v Pi_pg dv, int v v^T Pi_pg dv) at each pair (V, W)."""
    V, W = _pairs(V, W)
    eps, eta = s.epsilon, s.eta
    a = eps * V - W
    if is_elastic(model):
        return _elastic_moments(model, V, a, a / eps, 2.0 * eta / (1.0 + eta), res)
    m0y, m1y, m2y = offset_moments(a, model.beta, res)
    c = _centre_velocity(V, W, s)
    k = -eta / (1.0 + eta)
    m1 = (c * m0y[:, None] + k * m1y) / eps
    cm = c[:, :, None] * m1y[:, None, :]
    m2 = (m0y[:, None, None] * c[:, :, None] * c[:, None, :]
          + k * (cm + np.swapaxes(cm, 1, 2)) + k * k * m2y) / eps ** 2
    return m0y, m1, m2


def _elastic_moments(model, base, rel, shift_vec, factor, res, chunk: int = 4096):
    """Moments of base - factor (shift_vec.omega) omega against b(rel, omega) d omega.

    With rel = eps V - W this covers v'' (base V, shift rel/eps, factor
    2 eta/(1+eta)) and w'' (base W, shift rel, factor -2/(1+eta)).
    Pairs are processed in chunks to bound memory.
    """
    dirs, wts = lebedev(res.sphere_order)
    n = len(base)
    m0 = np.empty(n)
    m1 = np.empty((n, 3))
    m2 = np.empty((n, 3, 3))
    for start in range(0, n, chunk):
        sl = slice(start, start + chunk)
        b = model.kernel(rel[sl, None, :], dirs[None, :, :])
        proj = np.einsum("pi,ni->pn", shift_vec[sl], dirs)
        post = base[sl, None, :] - factor * proj[..., None] * dirs[None]
        wb = wts * b
        m0[sl] = np.sum(wb, axis=1)
        m1[sl] = np.einsum("pn,pni->pi", wb, post)
        m2[sl] = np.einsum("pn,pni,pnj->pij", wb, post, post)
    return m0, m1, m2


# --------------------------------------------------------------------------
# Grids over pairs (V, W) weighted by F(V) f(W)


def _require_mixture(F) -> GaussianMixture:
    if not isinstance(F, GaussianMixture):
        raise ValidationError("particle distribution must be a GaussianMixture for this operation")
    return F


def pair_grid(F: GaussianMixture, f: Callable, s: ScalingTriple,
              res: Resolution = DEFAULT_RESOLUTION):
    """Pairs (V, W) with weights F(V) f(W) dV dW for weak-form integrals.

    V runs over scaled Gauss-Hermite nodes of each mixture component and
    W = eps V - a with a on a spherical grid centred at 0, where the kinks
    in |eps V - W| sit.
    """
    F = _require_mixture(F)
    gh = gauss_hermite(res.particle_nodes)
    a_pts, wa = _relative_grid(res.relative_radial, res.relative_theta, res.relative_phi)
    Vs, Ws, weights = [], [], []
    for wk, mk, sk in F.components():
        V = mk + sk * gh.nodes
        wV = wk * gh.maxwell_weights()
        W = s.epsilon * V[:, None, :] - a_pts[None, :, :]
        Vs.append(np.broadcast_to(V[:, None, :], W.shape).reshape(-1, 3))
        Ws.append(W.reshape(-1, 3))
        weights.append((wV[:, None] * wa[None, :] * f(W)).reshape(-1))
    return np.concatenate(Vs), np.concatenate(Ws), np.concatenate(weights)


def weak_moments_R(f: Callable, F: GaussianMixture, model, s: ScalingTriple,
                   res: Resolution = DEFAULT_RESOLUTION):
    """(int R dw, int w R dw, int w w^T R dw) through the weak form."""
    V, W, wt = pair_grid(F, f, s, res)
    q = model.moments().q(np.linalg.norm(s.epsilon * V - W, axis=-1))
    m0, m1, m2 = gp_moments(model, V, W, s, res)
    r0 = np.sum(wt * (m0 - q))
    r1 = np.sum(wt[:, None] * (m1 - q[:, None] * W), axis=0)
    r2 = np.sum(wt[:, None, None] * (m2 - q[:, None, None] * W[:, :, None] * W[:, None, :]),
                axis=0)
    return float(r0), r1, r2


def weak_moments_D(F: GaussianMixture, f: Callable, model, s: ScalingTriple,
                   res: Resolution = DEFAULT_RESOLUTION):
    """(int D dv, int v D dv, int v v^T D dv) through the weak form."""
    V, W, wt = pair_grid(F, f, s, res)
    q = model.moments().q(np.linalg.norm(s.epsilon * V - W, axis=-1))
    m0, m1, m2 = pg_moments(model, V, W, s, res)
    d0 = np.sum(wt * (m0 - q))
    d1 = np.sum(wt[:, None] * (m1 - q[:, None] * V), axis=0)
    d2 = np.sum(wt[:, None, None] * (m2 - q[:, None, None] * V[:, :, None] * V[:, None, :]),
                axis=0)
    return float(d0), d1, d2


def weak_transfer_R(psi: Callable, f: Callable, F: GaussianMixture, model, s: ScalingTriple,
                    res: Resolution = DEFAULT_RESOLUTION, chunk: int = 2048) -> np.ndarray:
    """int psi(w) R(f, F)(w) dw for a general test function psi."""
    V, W, wt = pair_grid(F, f, s, res)
    q = model.moments().q(np.linalg.norm(s.epsilon * V - W, axis=-1))
    total = None
    for start in range(0, len(V), chunk):
        sl = slice(start, start + chunk)
        gain = gp_transfer(model, psi, V[sl], W[sl], s, res)
        loss = np.asarray(psi(W[sl]), dtype=float)
        qq = q[sl].reshape((-1,) + (1,) * (loss.ndim - 1))
        ww = wt[sl].reshape(qq.shape)
        part = np.sum(ww * (gain - qq * loss), axis=0)
        total = part if total is None else total + part
    return total


# --------------------------------------------------------------------------
# Pointwise collision integrals


def apply_D(F: Callable, f: Callable, model, s: ScalingTriple, v_points,
            res: Resolution = DEFAULT_RESOLUTION) -> np.ndarray:
    """Particle-side collision integral D(F, f) at the given velocities."""
    v_points = np.atleast_2d(np.asarray(v_points, dtype=float))
    eps, eta = s.epsilon, s.eta
    a_pts, wa = _relative_grid(res.relative_radial, res.relative_theta, res.relative_phi)
    out = np.empty(len(v_points))
    if is_elastic(model):
        dirs, wts = lebedev(res.sphere_order)
        b = model.kernel(a_pts[:, None, :], dirs[None, :, :])
        proj = (a_pts @ dirs.T)[..., None] * dirs[None]
        weight = wa[:, None] * wts[None, :] * b
        for i, v in enumerate(v_points):
            w = eps * v - a_pts
            v_post = v - (2.0 * eta / (eps * (1.0 + eta))) * proj
            w_post = w[:, None, :] + (2.0 / (1.0 + eta)) * proj
            integrand = F(v_post) * f(w_post) - F(v) * f(w)[:, None]
            out[i] = np.sum(weight * integrand)
        return out
    pts, wy = _offset_grid(model.beta, res.offset_radial, res.offset_theta, res.offset_phi)
    Y = _oriented(pts, a_pts)
    dens = offset_density(Y, a_pts[:, None, :], model.beta) * wy
    _check_offset_mass(dens, a_pts, res)
    weight = wa[:, None] * dens
    shift_v = eta * (Y + a_pts[:, None, :]) / (eps * (1.0 + eta))
    shift_w = (eta * Y - a_pts[:, None, :]) / (1.0 + eta)
    for i, v in enumerate(v_points):
        gain = F(v + shift_v) * f(eps * v + shift_w)
        loss = F(v) * f(eps * v - a_pts)
        out[i] = np.sum(weight * (gain - loss[:, None]))
    return out


def _check_offset_mass(dens, a_pts, res):
    size = np.linalg.norm(a_pts, axis=-1)
    err = np.max(np.abs(np.sum(dens, axis=1) - size) / size)
    if err > res.mass_tolerance:
        raise QuadratureError(f"offset grid unresolved: gain/loss mass mismatch {err:.2e}",
                              value=float(err))


def _patch(centres: np.ndarray, mean: np.ndarray, radius: float, res: Resolution):
    """Spherical patches about each centre covering the ball of given radius about mean.

    centres has shape (..., 3); returns points (..., n, 3) and weights (..., n).
    A centre inside the ball gets a full ball reaching past the far side; an
    outside centre gets the cone of directions that sees the ball.
    """
    centres = np.asarray(centres, dtype=float)
    offset = mean - centres
    dist = np.linalg.norm(offset, axis=-1)
    inside = dist <= radius
    r_lo = np.where(inside, 0.0, dist - radius)
    r_hi = dist + radius
    th_hi = np.where(inside, np.pi, np.arcsin(np.minimum(radius / np.maximum(dist, radius), 1.0)))
    rho, w_rho = gauss_legendre(res.patch_radial, 0.0, 1.0)
    tau, w_tau = gauss_legendre(res.patch_theta, 0.0, 1.0)
    phi = 2.0 * np.pi * (np.arange(res.patch_phi) + 0.5) / res.patch_phi
    span = (r_hi - r_lo)[..., None]
    r = r_lo[..., None] + span * rho                      # (..., nr)
    th = th_hi[..., None] * tau                           # (..., nt)
    st, ct = np.sin(th), np.cos(th)
    local = np.stack(np.broadcast_arrays(
        r[..., :, None, None] * st[..., None, :, None] * np.cos(phi),
        r[..., :, None, None] * st[..., None, :, None] * np.sin(phi),
        r[..., :, None, None] * ct[..., None, :, None] * np.ones_like(phi)), axis=-1)
    shape = local.shape[:-4] + (-1, 3)
    local = local.reshape(shape)
    weights = ((span * w_rho * r * r)[..., :, None, None]
               * (th_hi[..., None] * w_tau * st)[..., None, :, None]
               * (2.0 * np.pi / res.patch_phi) * np.ones_like(phi))
    weights = weights.reshape(weights.shape[:-3] + (-1,))
    axis = np.where(dist[..., None] > 0.0, offset, np.array([0.0, 0.0, 1.0]))
    pts = np.einsum("...ij,...nj->...ni", frame_from_axis(axis), local) + centres[..., None, :]
    return pts, weights


def apply_R(f: Callable, F: GaussianMixture, model, s: ScalingTriple, w_points,
            res: Resolution = DEFAULT_RESOLUTION, chunk: int = 64) -> np.ndarray:
    """Gas-side collision integral R(f, F) at the given velocities.

    The particle velocity is integrated per mixture component on a spherical
    patch centred at w/eps, where |eps V - w| has its kink.
    """
    F = _require_mixture(F)
    w_points = np.atleast_2d(np.asarray(w_points, dtype=float))
    eps, eta = s.epsilon, s.eta
    out = np.zeros(len(w_points))
    if is_elastic(model):
        dirs, wts = lebedev(res.sphere_order)
    else:
        a_pts, wa = _relative_grid(res.relative_radial, res.relative_theta, res.relative_phi)
    for i, w in enumerate(w_points):
        kink = w / eps
        total = 0.0
        for wk, mk, sk in F.components():
            comp = GaussianMixture.single(mk, sk, wk)
            radius = res.support_sigmas * sk
            V, wV = _patch(kink, mk, radius, res)
            FV = comp(V)
            if is_elastic(model):
                z = eps * V - w
                b = model.kernel(z[:, None, :], dirs[None, :, :])
                proj = (z @ dirs.T)[..., None] * dirs[None]
                v_post = V[:, None, :] - (2.0 * eta / (eps * (1.0 + eta))) * proj
                w_post = w + (2.0 / (1.0 + eta)) * proj
                gain = np.sum(wV[:, None] * wts[None, :] * b * comp(v_post) * f(w_post))
                total += gain - np.sum(wV[:, None] * wts[None, :] * b * FV[:, None] * f(w))
                continue
            loss = f(w) * np.sum(wV * FV * np.linalg.norm(eps * V - w, axis=-1))
            # The gain kink sits at w/eps + eta a / ((1+eta) eps), which moves with a.
            gain = 0.0
            for start in range(0, len(a_pts), chunk):
                ac = a_pts[start:start + chunk]
                Va, wVa = _patch(kink + eta * ac / ((1.0 + eta) * eps), mk, radius, res)
                y = (1.0 + eta) * (w - eps * Va) + eta * ac[:, None, :]
                dens = offset_density(y, ac[:, None, :], model.beta)
                fW = f(eps * Va - ac[:, None, :])
                weight = wVa * comp(Va) * wa[start:start + chunk, None]
                gain += (1.0 + eta) ** 3 * np.sum(weight * dens * fW)
            total += gain - loss
        out[i] = total
    return out
