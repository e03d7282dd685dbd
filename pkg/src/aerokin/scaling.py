"""Physical setup, nondimensionalization and the small-parameter regime."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import DilutenessWarning, ValidationError

DILUTENESS_THRESHOLD = 0.01


def _rel_close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(abs(a), abs(b))


@dataclass(frozen=True)
class PhysicalSetup:
    box_size: float
    n_particles_density: float
    n_gas_density: float
    thermal_speed_particles: float
    thermal_speed_gas: float
    cross_section_pp: float
    cross_section_pg: float
    cross_section_gg: float
    mass_ratio: float
    mass_fraction: float

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be a finite positive number, got {value!r}")
        if not _rel_close(self.mass_ratio / self.mass_fraction,
                          self.n_particles_density / self.n_gas_density, 1e-12):
            raise ValidationError("mass_ratio/mass_fraction must equal N_p/N_g "
                                  "(relative tolerance 1e-12)")
        if self.thermal_speed_particles > self.thermal_speed_gas:
            raise ValidationError("thermal speed ratio V_p/V_g must lie in (0, 1]")
        if self.mass_ratio > 1.0:
            raise ValidationError("mass_ratio must lie in (0, 1]")


@dataclass(frozen=True)
class ScalingTriple:
    epsilon: float
    eta: float
    mu: float

    def __post_init__(self):
        for name in ("epsilon", "eta", "mu"):
            value = getattr(self, name)
            if not (math.isfinite(value) and 0.0 < value <= 1.0):
                raise ValidationError(f"{name} must lie in (0, 1], got {value!r}")

    @property
    def eta_over_eps2(self) -> float:
        return self.eta / self.epsilon ** 2

    @property
    def eps_over_mu2(self) -> float:
        return self.epsilon / self.mu ** 2

    @property
    def within_limit_constraints(self) -> bool:
        return self.eta_over_eps2 <= 1.0 and self.eps_over_mu2 <= 1.0


@dataclass(frozen=True)
class ScaledSystem:
    """A scaling triple together with the coefficients of the scaled system."""

    triple: ScalingTriple
    inv_eta: float
    inv_mu: float
    mu_over_eps2: float
    diluteness: float

    @property
    def dilute(self) -> bool:
        return self.diluteness < DILUTENESS_THRESHOLD


def nondimensionalize(setup: PhysicalSetup, closure_tol: float = 1e-9) -> ScaledSystem:
    """Compute (epsilon, eta, mu) and the scaled-system coefficients.

    The collision closures N_p S_pg L = eps/mu and N_g S_gg L = mu/eps must
    hold to closure_tol relative. A diluteness number N_p S_pp L at or above
    0.01 only triggers a DilutenessWarning.
    """
    eps = setup.thermal_speed_particles / setup.thermal_speed_gas
    triple = ScalingTriple(eps, setup.mass_ratio, setup.mass_fraction)
    mu = triple.mu
    pg = setup.n_particles_density * setup.cross_section_pg * setup.box_size
    gg = setup.n_gas_density * setup.cross_section_gg * setup.box_size
    if not _rel_close(pg, eps / mu, closure_tol):
        raise ValidationError(f"N_p S_pg L = {pg:.17g} differs from eps/mu = {eps / mu:.17g}")
    if not _rel_close(gg, mu / eps, closure_tol):
        raise ValidationError(f"N_g S_gg L = {gg:.17g} differs from mu/eps = {mu / eps:.17g}")
    dil = setup.n_particles_density * setup.cross_section_pp * setup.box_size
    if dil >= DILUTENESS_THRESHOLD:
        warnings.warn(f"particle-particle collisions not negligible: N_p S_pp L = {dil:.3g}",
                      DilutenessWarning, stacklevel=2)
    return ScaledSystem(triple, 1.0 / triple.eta, 1.0 / mu, mu / eps ** 2, dil)


def admissible_sequence(n_max: int) -> list[ScalingTriple]:
    """mu = 1/n, eps = n^-3, eta = n^-8 for n = 2..n_max."""
    if n_max < 2:
        raise ValidationError("n_max must be at least 2")
    return [ScalingTriple(float(n) ** -3, float(n) ** -8, 1.0 / n) for n in range(2, n_max + 1)]


def power_sequence(mu_power: float, eps_power: float, eta_power: float,
                   n_min: int = 2, n_max: int = 6) -> list[ScalingTriple]:
    """mu = n^-a, eps = n^-b, eta = n^-c, after checking the limit constraints."""
    check_power_constraints(mu_power, eps_power, eta_power)
    if n_min < 2 or n_max < n_min:
        raise ValidationError("need 2 <= n_min <= n_max")
    return [ScalingTriple(float(n) ** -eps_power, float(n) ** -eta_power, float(n) ** -mu_power)
            for n in range(n_min, n_max + 1)]


def check_power_constraints(mu_power: float, eps_power: float, eta_power: float) -> None:
    """Reject exponents for which one of the four required limits fails."""
    if mu_power <= 0:
        raise ValidationError("sequence violates mu -> 0 (mu exponent must be positive)")
    if eps_power <= 0:
        raise ValidationError("sequence violates eps -> 0 (eps exponent must be positive)")
    if eta_power <= 2 * eps_power:
        raise ValidationError("sequence violates eta/eps^2 -> 0 (need eta exponent > 2 * eps exponent)")
    if eps_power <= 2 * mu_power:
        raise ValidationError("sequence violates eps/mu^2 -> 0 (need eps exponent > 2 * mu exponent)")


def check_sequence(sequence: list[ScalingTriple], require: tuple[str, ...] = ("eta_over_eps2",
                                                                            "eps_over_mu2")) -> None:
    """Finite-sequence proxy for the limit constraints.

    Each listed ratio must be at most 1 on every element and strictly
    decreasing along the sequence; eps and eta must be strictly decreasing.
    """
    if len(sequence) < 2:
        raise ValidationError("a limit sequence needs at least two elements")
    labels = {"eta_over_eps2": "eta/eps^2 -> 0", "eps_over_mu2": "eps/mu^2 -> 0",
              "eps_over_mu": "eps/mu -> 0"}
    for key in require:
        if key == "eps_over_mu":
            vals = [s.epsilon / s.mu for s in sequence]
        else:
            vals = [getattr(s, key) for s in sequence]
        if any(v > 1.0 for v in vals) or any(b >= a for a, b in zip(vals, vals[1:])):
            raise ValidationError(f"sequence violates {labels[key]}")
    for key in ("epsilon", "eta"):
        vals = [getattr(s, key) for s in sequence]
        if any(b >= a for a, b in zip(vals, vals[1:])):
            raise ValidationError(f"sequence violates {key} -> 0")
