"""Spectral Stokes-Brinkman solver on the periodic unit box.

Solves  -nu Lap u + grad p = kappa (j - rho u),  div u = 0  on an N^3 grid.
The density-weighted drag is split as kappa rho_ref u, kept implicit in the
resolvent, plus kappa (rho - rho_ref) u, lagged in a fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import fft

from .errors import NonConvergenceError, ValidationError


@dataclass
class FluidField:
    """Velocity u (3, N, N, N) with axes (x, y, z), its rfft spectrum and the pressure."""

    velocity: np.ndarray
    spectrum: np.ndarray
    pressure: np.ndarray
    nu: float
    kappa: float
    iterations: int = 0
    residual: float = 0.0
    history: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.velocity.shape[1]

    def max_speed(self) -> float:
        return float(np.sqrt(np.max(np.sum(self.velocity ** 2, axis=0)))) if self.velocity.size else 0.0

    def divergence(self) -> float:
        return spectral_divergence(self.spectrum)


def wavenumbers(n: int):
    """Integer wavevectors on the rfft half-grid, each of shape (N, N, N//2 + 1)."""
    k = np.fft.fftfreq(n, 1.0 / n)
    kz = np.fft.rfftfreq(n, 1.0 / n)
    return np.meshgrid(k, k, kz, indexing="ij")


def resolved_modes(n: int) -> np.ndarray:
    """Mask of rfft modes with every |k_i| < N/2.

    Nyquist modes of an even grid have no real, divergence-free
    representation (k and -k alias), so u carries none.
    """
    kvec = wavenumbers(n)
    half = n / 2.0
    return (np.abs(kvec[0]) < half) & (np.abs(kvec[1]) < half) & (np.abs(kvec[2]) < half)


def leray_project(spec: np.ndarray, kvec) -> np.ndarray:
    """Apply I - k k^T / |k|^2 mode by mode; the k = 0 mode passes through."""
    k2 = kvec[0] ** 2 + kvec[1] ** 2 + kvec[2] ** 2
    safe = np.where(k2 == 0, 1.0, k2)
    dot = (kvec[0] * spec[0] + kvec[1] * spec[1] + kvec[2] * spec[2]) / safe
    return np.stack([spec[i] - kvec[i] * dot for i in range(3)])


def spectral_divergence(spec: np.ndarray) -> float:
    """max_k |k . u_hat(k)| / max_k |u_hat(k)| (0 for a vanishing field)."""
    kvec = wavenumbers(spec.shape[1])
    top = float(np.max(np.abs(spec))) if spec.size else 0.0
    if top == 0.0:
        return 0.0
    div = kvec[0] * spec[0] + kvec[1] * spec[1] + kvec[2] * spec[2]
    return float(np.max(np.abs(div))) / top


def reference_density(rho: np.ndarray, shift: str = "midrange") -> float:
    """Density kept implicit in the resolvent.

    'midrange' gives the fixed point the contraction factor
    (max - min) / (max + min) < 1 for any nonnegative, nonzero density;
    'mean' is the grid average.
    """
    if shift == "midrange":
        return 0.5 * (float(np.max(rho)) + float(np.min(rho)))
    if shift == "mean":
        return float(np.mean(rho))
    raise ValidationError(f"unknown density shift {shift!r}")


def stokes_solve(rho: np.ndarray, flux: np.ndarray, nu: float, kappa: float,
                 u_prev: np.ndarray | None = None, tol: float = 1e-12, max_iter: int = 200,
                 shift: str = "midrange", workers: int = 1, method: str = "cg") -> FluidField:
    """Stokes-Brinkman solve for density rho (N,N,N) and particle flux j (3,N,N,N).

    Both methods split kappa rho u into kappa rho_ref u, inverted exactly in
    Fourier space, and kappa (rho - rho_ref) u. 'fixed-point' lags the second
    part; 'cg' uses the exact inverse of the first as a preconditioner for
    conjugate gradients on the divergence-free fields, where the operator is
    symmetric positive definite. The residual
    ||-nu Lap u + grad p - kappa (j - rho u)|| / ||kappa j|| is measured over
    the resolved Fourier modes after each iteration.
    """
    rho = np.asarray(rho, dtype=float)
    flux = np.asarray(flux, dtype=float)
    n = rho.shape[0]
    if rho.shape != (n, n, n) or flux.shape != (3, n, n, n):
        raise ValidationError("density must be (N,N,N) and flux (3,N,N,N)")
    if not (nu > 0.0 and kappa > 0.0):
        raise ValidationError("nu and kappa must be positive")
    if max_iter < 1 or not tol > 0.0:
        raise ValidationError("need max_iter >= 1 and tol > 0")
    if np.any(rho < 0.0):
        raise ValidationError("particle density must be nonnegative")
    if method not in ("cg", "fixed-point"):
        raise ValidationError(f"unknown Stokes method {method!r}")

    axes = (1, 2, 3)
    shape = (n, n, n)
    kvec = wavenumbers(n)
    k2 = kvec[0] ** 2 + kvec[1] ** 2 + kvec[2] ** 2
    ref = reference_density(rho, shift)
    resolvent = nu * (2.0 * np.pi) ** 2 * k2 + kappa * ref
    keep = resolved_modes(n)
    j_hat = fft.rfftn(flux, axes=axes, workers=workers)
    force_scale = _parseval_norm(kappa * j_hat * keep)

    zero = (0, 0, 0)
    if ref == 0.0:
        # no particles at all: the mean mode carries no drag
        if np.max(np.abs(j_hat[(slice(None),) + zero])) > 0.0:
            raise ValidationError("zero density with a nonzero mean force: mean mode unsolvable")
        resolvent[zero] = 1.0

    def forward(u):
        return fft.rfftn(u, axes=axes, workers=workers)

    def backward(spec):
        return fft.irfftn(spec, s=shape, axes=axes, workers=workers)

    def check(u, u_hat):
        return _residual(u, u_hat, rho, j_hat, nu, kappa, kvec, k2, keep, force_scale, workers)

    history = []
    if u_prev is None:
        u_hat = np.zeros((3,) + kvec[0].shape, dtype=complex)
    else:
        u_hat = keep * leray_project(forward(np.asarray(u_prev, dtype=float)), kvec)
    u = backward(u_hat)

    if method == "fixed-point":
        for it in range(1, max_iter + 1):
            lagged = forward((rho - ref) * u)
            u_hat = keep * leray_project(kappa * (j_hat - lagged), kvec) / resolvent
            u = backward(u_hat)
            residual, p_hat = check(u, u_hat)
            history.append(residual)
            if residual <= tol:
                break
        else:
            raise NonConvergenceError(
                f"Stokes fixed point did not reach {tol:g} in {max_iter} iterations",
                iterations=max_iter, residual=residual)
    else:
        def apply_op(spec):
            return keep * leray_project(nu * (2.0 * np.pi) ** 2 * k2 * spec
                                        + kappa * forward(rho * backward(spec)), kvec)

        def inner(x, y):
            return float(np.real(np.sum(_half_weights(n) * np.conj(x) * y)))

        r = keep * leray_project(kappa * j_hat, kvec) - apply_op(u_hat)
        z = r / resolvent
        d = z
        rz = inner(r, z)
        residual, p_hat = check(u, u_hat)
        history.append(residual)
        it = 0
        while residual > tol:
            if it == max_iter:
                raise NonConvergenceError(
                    f"Stokes conjugate gradients did not reach {tol:g} in {max_iter} iterations",
                    iterations=max_iter, residual=residual)
            it += 1
            ad = apply_op(d)
            step = rz / inner(d, ad)
            u_hat = u_hat + step * d
            r = r - step * ad
            u = backward(u_hat)
            residual, p_hat = check(u, u_hat)
            history.append(residual)
            z = r / resolvent
            rz_new = inner(r, z)
            d = z + (rz_new / rz) * d
            rz = rz_new
    # round trip through real space keeps the stored spectrum Hermitian
    u_hat = forward(u)
    pressure = backward(p_hat[None])[0]
    return FluidField(u, u_hat, pressure, nu, kappa, it, residual, history)


def _residual(u, u_hat, rho, j_hat, nu, kappa, kvec, k2, keep, force_scale, workers):
    force = keep * kappa * (j_hat - fft.rfftn(rho * u, axes=(1, 2, 3), workers=workers))
    safe = np.where(k2 == 0, 1.0, k2)
    # gradient part of the force defines the pressure: 2 pi i k p_hat = (k k^T/|k|^2) F
    p_hat = -1j * (kvec[0] * force[0] + kvec[1] * force[1] + kvec[2] * force[2]) / (2.0 * np.pi * safe)
    p_hat[0, 0, 0] = 0.0
    grad_p = np.stack([2j * np.pi * kvec[i] * p_hat for i in range(3)])
    res = nu * (2.0 * np.pi) ** 2 * k2 * u_hat + grad_p - force
    norm = _parseval_norm(res)
    return (norm / force_scale if force_scale > 0.0 else norm), p_hat


def _half_weights(n: int) -> np.ndarray:
    """Multiplicity of each rfft column in the full spectrum."""
    weight = np.full(n // 2 + 1, 2.0)
    weight[0] = 1.0
    if n % 2 == 0:
        weight[-1] = 1.0
    return weight


def _parseval_norm(spec: np.ndarray) -> float:
    """L^2 norm over the full spectrum from an rfft half-spectrum."""
    return float(np.sqrt(np.sum(_half_weights(spec.shape[1]) * np.abs(spec) ** 2)))
