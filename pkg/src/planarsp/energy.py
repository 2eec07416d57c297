"""Energy functional, Euler-Lagrange residual, Lagrange multiplier and norms."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateFieldError, TruncationWarning
from .grid import Field2D, Grid2D, grad_norm_sq, integrate, laplacian
from .logconv import KernelTable, log_potential

__all__ = [
    "EnergyBreakdown",
    "NormReport",
    "external_potential",
    "evaluate_energy",
    "el_operator",
    "el_residual",
    "energy_gradient",
    "lagrange_multiplier",
    "gn_ratio",
    "norms",
]


def external_potential(g: Grid2D) -> np.ndarray:
    """``ln(1 + |x|^2)`` sampled at the nodes."""
    return np.log1p(g.radius**2)


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    external: float
    convolution: float
    quartic: float
    warnings: tuple = field(default=(), compare=False)

    @property
    def total(self) -> float:
        return self.kinetic + self.external + self.convolution + self.quartic

    def as_dict(self) -> dict:
        return {
            "kinetic": self.kinetic,
            "external": self.external,
            "convolution": self.convolution,
            "quartic": self.quartic,
            "total": self.total,
        }


@dataclass(frozen=True)
class NormReport:
    h1: float
    star: float

    @property
    def x_norm(self) -> float:
        return float(np.sqrt(self.h1**2 + self.star**2))


def _boundary_mass_fraction(u: Field2D) -> float:
    v2 = u.values**2
    edge = v2[:2].sum() + v2[-2:].sum() + v2[2:-2, :2].sum() + v2[2:-2, -2:].sum()
    tot = v2.sum()
    return float(edge / tot) if tot > 0 else 0.0


def evaluate_energy(u: Field2D, K: KernelTable, phi: Field2D | None = None) -> EnergyBreakdown:
    """``E(u) = 1/2 int |grad u|^2 + 1/2 int V u^2 + 1/4 V0(u) - 1/4 int u^4``.

    ``phi`` may carry a precomputed ``ln|.| * u^2``.
    """
    notes = ()
    if _boundary_mass_fraction(u) > 1e-6:
        notes = ("boundary mass above 1e-6 of total",)
        warnings.warn(notes[0], TruncationWarning, stacklevel=2)
    u2 = u.values**2
    if phi is None:
        phi = log_potential(Field2D(u.grid, u2), K)
    h2 = u.grid.cell_area
    return EnergyBreakdown(
        kinetic=0.5 * grad_norm_sq(u),
        external=0.5 * h2 * float(np.sum(external_potential(u.grid) * u2)),
        convolution=0.25 * h2 * float(np.sum(phi.values * u2)),
        quartic=-0.25 * h2 * float(np.sum(u2 * u2)),
        warnings=notes,
    )


def el_operator(u: Field2D, K: KernelTable, phi: Field2D | None = None) -> Field2D:
    """``-Delta u + V u + Phi[u^2] u - u^3`` (the Euler-Lagrange left side without ``mu``)."""
    v = u.values
    if phi is None:
        phi = log_potential(Field2D(u.grid, v * v), K)
    out = -laplacian(u).values + (external_potential(u.grid) + phi.values - v * v) * v
    return Field2D(u.grid, out)


def energy_gradient(u: Field2D, K: KernelTable) -> Field2D:
    """L^2 gradient of ``E``, i.e. the first variation ``dE(u)[v] = <energy_gradient(u), v>``."""
    return el_operator(u, K)


def el_residual(
    u: Field2D,
    mu: float,
    K: KernelTable | None,
    external: bool = True,
    convolution: bool = True,
) -> float:
    """``||-Delta u + V u + Phi[u^2] u - mu u - u^3||_2 / ||u||_2``.

    ``external`` / ``convolution`` switch off the corresponding terms, which
    reduces the equation to ``-Delta u - mu u - u^3 = 0``.
    """
    v = u.values
    r = -laplacian(u).values - (mu + v * v) * v
    if external:
        r = r + external_potential(u.grid) * v
    if convolution:
        r = r + log_potential(Field2D(u.grid, v * v), K).values * v
    den = np.sum(v * v)
    if den == 0:
        raise DegenerateFieldError("zero field has no residual")
    return float(np.sqrt(np.sum(r * r) / den))


def lagrange_multiplier(u: Field2D, e: float, K: KernelTable, V0: float | None = None) -> float:
    """``mu = [2 e + V0(u)/2 - int u^4 / 2] / rho``."""
    rho = u.mass
    if not rho > 1e-300:
        raise DegenerateFieldError("multiplier undefined for a zero-mass field")
    u2 = u.values**2
    h2 = u.grid.cell_area
    if V0 is None:
        V0 = h2 * float(np.sum(log_potential(Field2D(u.grid, u2), K).values * u2))
    quart = h2 * float(np.sum(u2 * u2))
    return (2.0 * e + 0.5 * V0 - 0.5 * quart) / rho


def gn_ratio(u: Field2D, rho_star: float) -> float:
    """``int u^4 * rho* / (2 int |grad u|^2 int u^2)``; at most 1, equal on scalings of Q."""
    grad2 = grad_norm_sq(u)
    if u.mass == 0 or grad2 == 0:
        raise DegenerateFieldError("ratio undefined for a zero or constant field")
    quart = integrate(Field2D(u.grid, u.values**4))
    return quart * rho_star / (2.0 * grad2 * u.mass)


def norms(u: Field2D) -> NormReport:
    h1 = np.sqrt(grad_norm_sq(u) + u.mass)
    star2 = u.grid.cell_area * float(np.sum(external_potential(u.grid) * u.values**2))
    return NormReport(h1=float(h1), star=float(np.sqrt(star2)))
