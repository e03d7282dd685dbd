"""Numerical checks of the structural assumptions on the collision measures.

H1: both measures have total mass q(|eps V - W|).
H2: their first moments balance momentum with the rate Q.
H3: the particle-side spread about the centre-of-mass velocity is O(eta^2).
H4: the gas-side measure converges at rate O(eps + eta) against test functions.
H5: a weighted L^2 bound uniform in (eps, eta).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from .collision import (DEFAULT_RESOLUTION, Resolution, _relative_grid, gp_moments_raw,
                        gp_transfer, is_elastic, pg_transfer)
from .errors import ValidationError
from .gas import maxwellian
from .quadrature import gauss_legendre, lebedev
from .scaling import ScalingTriple

DEFAULT_WEIGHT_POWER = 4


@dataclass(frozen=True)
class HypothesisReport:
    hypothesis: str
    model: str
    n_samples: int
    max_rel_error: float
    fitted_C: float | None
    tolerance: float
    passed: bool
    spread: float | None = None
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RateFit:
    label: str
    abscissae: tuple[float, ...]
    errors: tuple[float, ...]
    slope: float
    half_width: float
    monotone: bool

    @property
    def fitted(self) -> bool:
        return np.isfinite(self.slope)


def model_label(model) -> str:
    if is_elastic(model):
        return model.name
    return f"{model.name}(beta={model.beta:g})"


def _maxwell_pairs(n_samples: int, seed: int):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n_samples, 3)), rng.standard_normal((n_samples, 3))


def _ones(x):
    return np.ones(x.shape[:-1])


def check_H1(model, s: ScalingTriple, n_samples: int = 50, seed: int = 0,
             tol: float = 1e-6, res: Resolution = DEFAULT_RESOLUTION) -> HypothesisReport:
    V, W = _maxwell_pairs(n_samples, seed)
    q = model.moments().q(np.linalg.norm(s.epsilon * V - W, axis=-1))
    keep = q > 0.0
    pg = pg_transfer(model, _ones, V, W, s, res)
    gp = gp_transfer(model, _ones, V, W, s, res)
    err = 0.0
    if np.any(keep):
        err = float(max(np.max(np.abs(pg[keep] - q[keep]) / q[keep]),
                        np.max(np.abs(gp[keep] - q[keep]) / q[keep])))
    return HypothesisReport("H1", model_label(model), int(np.sum(keep)), err, None, tol,
                            err <= tol, details={"excluded": int(np.sum(~keep))})


def check_H2(model, s: ScalingTriple, n_samples: int = 50, seed: int = 0,
             tol: float = 1e-5, res: Resolution = DEFAULT_RESOLUTION) -> HypothesisReport:
    eps, eta = s.epsilon, s.eta
    V, W = _maxwell_pairs(n_samples, seed)
    a = eps * V - W
    r = np.linalg.norm(a, axis=-1)
    mom = model.moments()
    ref = -(eta / (1.0 + eta)) * a * mom.Q(r)[:, None]
    keep = r > 0.0
    pg1 = pg_transfer(model, lambda v: v, V, W, s, res)
    pg0 = pg_transfer(model, _ones, V, W, s, res)
    gp1 = gp_transfer(model, lambda w: w, V, W, s, res)
    gp0 = gp_transfer(model, _ones, V, W, s, res)
    particle = eps * (pg1 - V * pg0[:, None])
    gas = -eta * (gp1 - W * gp0[:, None])
    scale = np.max(np.abs(ref), axis=1)
    err = 0.0
    ratio_dev = 0.0
    if np.any(keep):
        err = float(max(np.max(np.max(np.abs(particle - ref), axis=1)[keep] / scale[keep]),
                        np.max(np.max(np.abs(gas - ref), axis=1)[keep] / scale[keep])))
        # Q/q recovered from the quadrature, compared with the model's rate functions.
        q_num = gp0[keep]
        Q_num = -(1.0 + eta) / eta * np.einsum("pi,pi->p", particle[keep], a[keep]) / r[keep] ** 2
        ratio_dev = float(np.max(np.abs(Q_num / q_num - mom.Q(r[keep]) / mom.q(r[keep]))))
    return HypothesisReport("H2", model_label(model), int(np.sum(keep)), err, None, tol,
                            err <= tol, details={"Q_over_q_deviation": ratio_dev})


def h3_ratios(model, s: ScalingTriple, n_samples: int = 50, seed: int = 0,
              res: Resolution = DEFAULT_RESOLUTION):
    """Left side of H3 and its ratio to eta^2 (1 + |a|^2) q(|a|), per sample."""
    eps, eta = s.epsilon, s.eta
    V, W = _maxwell_pairs(n_samples, seed)
    a = eps * V - W
    r = np.linalg.norm(a, axis=-1)
    c = (eps * V + eta * W) / (1.0 + eta)

    def spread(v):
        d = eps * v - c[:, None, :]
        return np.einsum("...i,...i->...", d, d)

    lhs = pg_transfer(model, spread, V, W, s, res)
    q = model.moments().q(r)
    keep = q > 0.0
    return lhs[keep], lhs[keep] / (eta ** 2 * (1.0 + r[keep] ** 2) * q[keep])


def check_H3(model, s_list, n_samples: int = 50, seed: int = 0, tol: float = 0.2,
             res: Resolution = DEFAULT_RESOLUTION) -> HypothesisReport:
    """Fitted C = max ratio over samples and triples; spread of per-triple maxima."""
    per_triple = []
    for s in s_list:
        _, ratio = h3_ratios(model, s, n_samples, seed, res)
        if np.any(ratio <= 0.0):
            raise ValidationError("H3 ratio must be positive")
        per_triple.append(float(np.max(ratio)))
    per_triple = np.asarray(per_triple)
    C = float(np.max(per_triple))
    spread = float(np.max(np.abs(per_triple / np.mean(per_triple) - 1.0)))
    return HypothesisReport("H3", model_label(model), n_samples * len(per_triple), spread, C,
                            tol, spread <= tol, spread=spread,
                            details={"per_triple_C": per_triple.tolist()})


# --------------------------------------------------------------------------
# Test functions quadratic in w: Phi(w, W) = M(W) (c0 + c1.w + w.C2 w)


@dataclass(frozen=True)
class QuadraticTestFunction:
    label: str
    constant: Callable[[np.ndarray], np.ndarray] | None = None
    linear: Callable[[np.ndarray], np.ndarray] | None = None
    quadratic: Callable[[np.ndarray], np.ndarray] | None = None

    def coefficients(self, W: np.ndarray):
        shape = W.shape[:-1]
        c0 = np.zeros(shape) if self.constant is None else self.constant(W)
        c1 = np.zeros(shape + (3,)) if self.linear is None else self.linear(W)
        c2 = np.zeros(shape + (3, 3)) if self.quadratic is None else self.quadratic(W)
        return c0, np.broadcast_to(c1, shape + (3,)), np.broadcast_to(c2, shape + (3, 3))

    def __call__(self, w: np.ndarray, W: np.ndarray) -> np.ndarray:
        c0, c1, c2 = self.coefficients(W)
        return maxwellian(W) * (c0 + np.einsum("...i,...i->...", c1, w)
                                + np.einsum("...i,...ij,...j->...", w, c2, w))

    def integrate_moments(self, W, m0, m1, m2) -> np.ndarray:
        """int Phi(w, W) mu(dw) given the moments (m0, m1, m2) of mu."""
        c0, c1, c2 = self.coefficients(W)
        return maxwellian(W) * (c0 * m0 + np.einsum("...i,...i->...", c1, m1)
                                + np.einsum("...ij,...ij->...", c2, m2))

    def rotated(self, rot: np.ndarray) -> "QuadraticTestFunction":
        """Phi(R w, R W) as a quadratic test function."""
        base = self

        def c0(W):
            return base.coefficients(W @ rot.T)[0]

        def c1(W):
            return base.coefficients(W @ rot.T)[1] @ rot

        def c2(W):
            return np.einsum("ki,...kl,lj->...ij", rot, base.coefficients(W @ rot.T)[2], rot)

        return QuadraticTestFunction(f"{self.label}@R", c0, c1, c2)


def _zero_vec(W):
    return np.zeros(W.shape)


def default_test_family() -> list[QuadraticTestFunction]:
    """(w.W) M(W), |w|^2 M(W), and the (1,2) entry of A~ (alpha = 1) times M(W)."""
    eye = np.eye(3)
    off = 0.5 * (np.outer(eye[0], eye[1]) + np.outer(eye[1], eye[0]))
    return [
        QuadraticTestFunction("w.W M(W)", linear=lambda W: W),
        QuadraticTestFunction("|w|^2 M(W)", quadratic=lambda W: np.broadcast_to(eye, W.shape[:-1] + (3, 3))),
        QuadraticTestFunction("A12(w) M(W)", quadratic=lambda W: np.broadcast_to(off, W.shape[:-1] + (3, 3))),
    ]


def odd_test_function() -> QuadraticTestFunction:
    """w_1 M(W): odd under (w, W) -> (-w, -W), so first-order terms survive."""
    return QuadraticTestFunction("w1 M(W)", linear=lambda W: np.broadcast_to(np.eye(3)[0], W.shape))


@dataclass(frozen=True)
class WeightedGrid:
    """Grid in V for integrals weighted by (1 + |V|^2)^(-p), plus the a-grid for W."""

    radial_nodes: int = 16
    sphere_order: int = 11
    radial_scale: float = 2.0
    relative_radial: int = 12
    relative_theta: int = 10
    relative_phi: int = 8

    def particle_points(self):
        t, wt = gauss_legendre(self.radial_nodes, 0.0, 1.0)
        r = self.radial_scale * t / (1.0 - t)
        wr = self.radial_scale * wt / (1.0 - t) ** 2
        dirs, wd = lebedev(self.sphere_order)
        pts = (r[:, None, None] * dirs[None]).reshape(-1, 3)
        w = (wr[:, None] * r[:, None] ** 2 * wd[None, :]).reshape(-1)
        return pts, w

    def relative_points(self):
        return _relative_grid(self.relative_radial, self.relative_theta, self.relative_phi)


def h4_integrals(model, eps: float, eta: float, family, grid: WeightedGrid,
                 res: Resolution = DEFAULT_RESOLUTION) -> np.ndarray:
    """I(V) = int int Phi(w, W) Pi_gp(w, dV dW) dw per V node, for each Phi.

    Returns shape (len(family), n_V). eps = eta = 0 gives the limit measure.
    """
    V, _ = grid.particle_points()
    a, wa = grid.relative_points()
    W = eps * V[:, None, :] - a[None, :, :]
    Vb = np.broadcast_to(V[:, None, :], W.shape).reshape(-1, 3)
    Wf = W.reshape(-1, 3)
    out = np.zeros((len(family), len(V)))
    if is_elastic(model):
        dirs, wts = lebedev(res.sphere_order)
        n_a = len(a)
        step = max(1, 4096 // n_a)
        for start in range(0, len(V), step):
            rows = slice(start * n_a, min(len(V), start + step) * n_a)
            Wc = Wf[rows]
            rel = eps * Vb[rows] - Wc
            b = model.kernel(rel[:, None, :], dirs[None, :, :])
            proj = (rel @ dirs.T)[..., None] * dirs[None]
            w_post = Wc[:, None, :] + (2.0 / (1.0 + eta)) * proj
            for k, phi in enumerate(family):
                vals = np.sum(wts * b * phi(w_post, Wc[:, None, :]), axis=1)
                out[k, start:start + step] = np.sum(vals.reshape(-1, n_a) * wa, axis=1)
        return out
    m0, m1, m2 = gp_moments_raw(model, Vb, Wf, eps, eta, res)
    for k, phi in enumerate(family):
        vals = phi.integrate_moments(Wf, m0, m1, m2)
        out[k] = np.sum(vals.reshape(len(V), -1) * wa, axis=1)
    return out


def h4_errors(model, sequence, family, p: int = DEFAULT_WEIGHT_POWER,
              grid: WeightedGrid | None = None, res: Resolution = DEFAULT_RESOLUTION):
    """Weighted L^1 distance to the limit for each test function and triple."""
    grid = grid or WeightedGrid()
    V, wV = grid.particle_points()
    weight = wV * (1.0 + np.einsum("ni,ni->n", V, V)) ** (-p)
    limit = h4_integrals(model, 0.0, 0.0, family, grid, res)
    errs = np.zeros((len(family), len(sequence)))
    for j, s in enumerate(sequence):
        diff = h4_integrals(model, s.epsilon, s.eta, family, grid, res) - limit
        errs[:, j] = np.sum(weight * np.abs(diff), axis=1)
    return errs


def fit_rate(label: str, abscissae, errors) -> RateFit:
    """Least-squares log-log slope with a 95% half-width; no fit when not monotone."""
    x = np.asarray(abscissae, dtype=float)
    e = np.asarray(errors, dtype=float)
    if np.any(np.diff(x) >= 0.0):
        raise ValidationError("rate abscissae must be strictly decreasing")
    monotone = bool(np.all(e > 0.0) and np.all(np.diff(e) < 0.0))
    if not monotone or len(x) < 4:
        return RateFit(label, tuple(x), tuple(e), float("nan"), float("nan"), monotone)
    fit = stats.linregress(np.log(x), np.log(e))
    half = float(stats.t.ppf(0.975, len(x) - 2) * fit.stderr)
    return RateFit(label, tuple(x), tuple(e), float(fit.slope), half, monotone)


def h4_default_sequence(k_min: int = 2, k_max: int = 6) -> list[ScalingTriple]:
    return [ScalingTriple(2.0 ** -k, 4.0 ** -k, 1.0) for k in range(k_min, k_max + 1)]


def check_H4_rate(model, sequence=None, family=None, p: int = DEFAULT_WEIGHT_POWER,
                  grid: WeightedGrid | None = None,
                  res: Resolution = DEFAULT_RESOLUTION) -> list[RateFit]:
    """One RateFit per test function over the sequence (default (2^-k, 4^-k), k=2..6)."""
    sequence = sequence or h4_default_sequence()
    family = family or default_test_family()
    errs = h4_errors(model, sequence, family, p, grid, res)
    x = [s.epsilon + s.eta for s in sequence]
    return [fit_rate(phi.label, x, errs[k]) for k, phi in enumerate(family)]


def h4_rotation_residual(model, family=None, n_rotations: int = 3, seed: int = 0,
                         grid: WeightedGrid | None = None,
                         res: Resolution = DEFAULT_RESOLUTION) -> float:
    """max |I00[Phi o T_R] - I00[Phi]|, relative to the largest |I00[Phi]|, over random rotations."""
    family = family or default_test_family()
    grid = grid or WeightedGrid()
    base = h4_integrals(model, 0.0, 0.0, family, grid, res)
    rng = np.random.default_rng(seed)
    scale = float(np.max(np.abs(base)))
    worst = 0.0
    rotations = stats.special_ortho_group.rvs(3, size=n_rotations, random_state=rng)
    for rot in np.reshape(rotations, (-1, 3, 3)):
        turned = h4_integrals(model, 0.0, 0.0, [phi.rotated(rot) for phi in family], grid, res)
        worst = max(worst, float(np.max(np.abs(turned - base))) / scale)
    return worst


# --------------------------------------------------------------------------
# H5


def hermite_family() -> list[tuple[str, Callable]]:
    """Orthonormal functions in L^2(M(w) dw)."""
    return [
        ("1", lambda w: np.ones(w.shape[:-1])),
        ("w1", lambda w: w[..., 0]),
        ("(w1^2-1)/sqrt2", lambda w: (w[..., 0] ** 2 - 1.0) / np.sqrt(2.0)),
        ("w1 w2", lambda w: w[..., 0] * w[..., 1]),
        ("(|w|^2-3)/sqrt6", lambda w: (np.einsum("...i,...i->...", w, w) - 3.0) / np.sqrt(6.0)),
    ]


def h5_integral(model, s: ScalingTriple, h: Callable, p: int = DEFAULT_WEIGHT_POWER,
                grid: WeightedGrid | None = None, res: Resolution = DEFAULT_RESOLUTION) -> float:
    grid = grid or WeightedGrid()
    V, wV = grid.particle_points()
    a, wa = grid.relative_points()
    W = s.epsilon * V[:, None, :] - a[None, :, :]
    Vb = np.broadcast_to(V[:, None, :], W.shape).reshape(-1, 3)
    Wf = W.reshape(-1, 3)
    m0, _, m2 = gp_moments_raw(model, Vb, Wf, s.epsilon, s.eta, res)
    transfer = m0 + np.trace(m2, axis1=1, axis2=2)
    w2 = np.einsum("ni,ni->n", Wf, Wf)
    vals = (1.0 + w2) * maxwellian(Wf) * np.abs(h(Wf)) * transfer
    per_V = np.sum(vals.reshape(len(V), -1) * wa, axis=1)
    weight = wV * (1.0 + np.einsum("ni,ni->n", V, V)) ** (-p)
    return float(np.sum(weight * per_V))


def check_H5(model, s_list, h_family=None, p: int = DEFAULT_WEIGHT_POWER, tol: float = 0.2,
             grid: WeightedGrid | None = None,
             res: Resolution = DEFAULT_RESOLUTION) -> HypothesisReport:
    """Fitted C = max over (s, h) of integral / ||h||; family members have unit norm."""
    h_family = h_family or hermite_family()
    table = np.array([[h5_integral(model, s, h, p, grid, res) for _, h in h_family]
                      for s in s_list])
    per_triple = np.max(table, axis=1)
    C = float(np.max(per_triple))
    spread = float(np.max(np.abs(per_triple / np.mean(per_triple) - 1.0)))
    return HypothesisReport("H5", model_label(model), table.size, spread, C, tol, spread <= tol,
                            spread=spread,
                            details={"integrals": table.tolist(),
                                     "labels": [name for name, _ in h_family]})
