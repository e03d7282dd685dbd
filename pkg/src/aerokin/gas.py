"""Linearized gas collision data: Maxwellian, the tensor A, its preimage and nu."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ExtrapolationError, QuadratureError, ValidationError
from .quadrature import MAXWELL_NORM, VelocityQuadrature, gauss_hermite


def maxwellian(w: np.ndarray) -> np.ndarray:
    """Standard Maxwellian (2 pi)^(-3/2) exp(-|w|^2/2) over the last axis."""
    w = np.asarray(w, dtype=float)
    return MAXWELL_NORM * np.exp(-0.5 * np.einsum("...i,...i->...", w, w))


def tensor_A(w: np.ndarray) -> np.ndarray:
    """Traceless tensor w (x) w - |w|^2 I / 3, shape (..., 3, 3).

    The last diagonal entry is set from the other two so the trace is exactly 0.
    """
    w = np.asarray(w, dtype=float)
    out = w[..., :, None] * w[..., None, :]
    third = (out[..., 0, 0] + out[..., 1, 1] + out[..., 2, 2]) / 3.0
    d0 = out[..., 0, 0] - third
    d1 = out[..., 1, 1] - third
    out[..., 0, 0] = d0
    out[..., 1, 1] = d1
    out[..., 2, 2] = -(d0 + d1)
    return out


@dataclass(frozen=True)
class GasModel:
    """Gas data for the linearized collision operator.

    The preimage of A under the linearized operator is taken as
    alpha(|w|) A(w). alpha is either a constant or a table in |w| that is
    interpolated by a monotone cubic (PCHIP). Outside the table the last value
    is held constant when extrapolate is True (a warning is emitted) and an
    ExtrapolationError is raised otherwise.
    """

    alpha: float = 1.0
    table_radii: tuple[float, ...] | None = None
    table_values: tuple[float, ...] | None = None
    extrapolate: bool = True
    growth_exponent: float = 0.0
    kernel_bound: float = 2.0
    _interp: PchipInterpolator | None = field(default=None, init=False, repr=False,
                                              compare=False)

    def __post_init__(self):
        if self.table_radii is None:
            if not np.isfinite(self.alpha):
                raise ValidationError("alpha must be finite")
            return
        r = np.asarray(self.table_radii, dtype=float)
        a = np.asarray(self.table_values, dtype=float)
        if r.ndim != 1 or r.shape != a.shape or len(r) < 2:
            raise ValidationError("alpha table needs matching radius/value columns of length >= 2")
        if np.any(np.diff(r) <= 0.0) or r[0] < 0.0:
            raise ValidationError("alpha table radii must be non-negative and increasing")
        if not np.all(np.isfinite(a)):
            raise ValidationError("alpha table values must be finite")
        object.__setattr__(self, "_interp", PchipInterpolator(r, a, extrapolate=False))

    @classmethod
    def from_table(cls, radii, values, extrapolate: bool = True) -> "GasModel":
        return cls(alpha=float("nan"), table_radii=tuple(np.asarray(radii, float)),
                   table_values=tuple(np.asarray(values, float)), extrapolate=extrapolate)

    @property
    def is_tabulated(self) -> bool:
        return self._interp is not None

    def alpha_of(self, r: np.ndarray) -> np.ndarray:
        """Scalar factor alpha(|w|) at speeds r."""
        r = np.asarray(r, dtype=float)
        if self._interp is None:
            return np.full(r.shape, self.alpha)
        lo, hi = self.table_radii[0], self.table_radii[-1]
        outside = (r < lo) | (r > hi)
        if np.any(outside):
            if not self.extrapolate:
                raise ExtrapolationError(
                    f"alpha table covers [{lo}, {hi}], requested speed {float(np.max(r))}")
            warnings.warn("alpha table extrapolated with constant end values",
                          RuntimeWarning, stacklevel=2)
        clipped = np.clip(r, lo, hi)
        return self._interp(clipped)


def a_tilde(model: GasModel, w: np.ndarray) -> np.ndarray:
    """Preimage tensor alpha(|w|) A(w), shape (..., 3, 3)."""
    w = np.asarray(w, dtype=float)
    return model.alpha_of(np.linalg.norm(w, axis=-1))[..., None, None] * tensor_A(w)


def viscosity(model: GasModel, quad: VelocityQuadrature | None = None) -> float:
    """nu = (1/10) int A~(w) : A(w) M(w) dw."""
    quad = quad or gauss_hermite(24)
    a = tensor_A(quad.nodes)
    r = np.linalg.norm(quad.nodes, axis=-1)
    contraction = model.alpha_of(r) * np.einsum("nij,nij->n", a, a)
    nu = float(np.sum(quad.maxwell_weights() * contraction)) / 10.0
    if not nu > 0.0:
        raise QuadratureError(f"viscosity must be positive, got {nu}", value=nu)
    return nu


def growth_constants(model: GasModel, radii: np.ndarray | None = None,
                     step: float = 1e-5) -> tuple[float, float]:
    """Smallest C with |A~| <= C(1+|w|^2) and |grad A~| <= C(1+|w|^2) on samples.

    Returns the two constants measured along rays in a fixed set of directions.
    """
    if radii is None:
        radii = np.linspace(0.0, 10.0, 201)
    dirs = np.array([[1.0, 0.0, 0.0], [0.6, 0.8, 0.0], [1.0, 1.0, 1.0]])
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    growth = 1.0 + np.einsum("ni,ni->n", pts, pts)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        values = np.linalg.norm(a_tilde(model, pts), axis=(-2, -1))
        grads = np.zeros(len(pts))
        for k in range(3):
            e = np.zeros(3)
            e[k] = step
            d = (a_tilde(model, pts + e) - a_tilde(model, pts - e)) / (2.0 * step)
            grads = grads + np.sum(d * d, axis=(-2, -1))
    return float(np.max(values / growth)), float(np.max(np.sqrt(grads) / growth))
