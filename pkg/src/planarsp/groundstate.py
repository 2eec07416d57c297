"""Radial ground state of -Delta Q + Q - Q^3 = 0 in the plane.

The profile is found by shooting on ``q0 = Q(0)``: a fixed-step RK4
integration of ``Q'' + Q'/r - Q + Q^3 = 0`` classifies each trial as an
overshoot (``Q`` crosses zero) or an undershoot (``Q'`` returns to zero while
``Q > 0``), and bisection narrows the bracket.  Past the radius where the
shooting orbit can no longer be trusted, the tail is replaced by the decaying
solution ``c K_0(r)`` of the linearized equation, whose leading behaviour is
``c sqrt(pi/2) r^{-1/2} e^{-r}``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numba
import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicHermiteSpline
from scipy.special import k0e, k1e

from .exceptions import ShootingError, TruncationWarning
from .grid import Field2D, Grid2D, gradient, laplacian

__all__ = [
    "RadialProfile",
    "shoot_Q",
    "embed_Q",
    "kernel_residual",
    "linearized_apply",
    "cached_profile",
]

OVERSHOOT = 1
UNDERSHOOT = -1


@numba.njit(cache=True)
def _rhs(r, q, p):
    return p, -p / r + q - q * q * q


@numba.njit(cache=True)
def _integrate(q0, dr, nsteps, record):
    """RK4 from r=0; returns (classification, last index, Q, Q')."""
    nrec = nsteps + 1 if record else 1
    Q = np.zeros(nrec)
    P = np.zeros(nrec)
    Q[0] = q0
    c = q0 - q0 * q0 * q0
    # Taylor start removes the 1/r singularity
    q = q0 + c * dr * dr / 4.0
    p = c * dr / 2.0
    if record:
        Q[1] = q
        P[1] = p
    r = dr
    status = 0
    last = 1
    if p >= 0.0:
        return UNDERSHOOT, last, Q, P
    for i in range(1, nsteps):
        k1q, k1p = _rhs(r, q, p)
        k2q, k2p = _rhs(r + 0.5 * dr, q + 0.5 * dr * k1q, p + 0.5 * dr * k1p)
        k3q, k3p = _rhs(r + 0.5 * dr, q + 0.5 * dr * k2q, p + 0.5 * dr * k2p)
        k4q, k4p = _rhs(r + dr, q + dr * k3q, p + dr * k3p)
        q = q + dr / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        p = p + dr / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        r = (i + 1) * dr
        last = i + 1
        if record:
            Q[i + 1] = q
            P[i + 1] = p
        if q <= 0.0:
            status = OVERSHOOT
            break
        if p >= 0.0:
            status = UNDERSHOOT
            break
    return status, last, Q, P


def _classify(q0: float, dr: float, nsteps: int) -> int:
    return _integrate(q0, dr, nsteps, False)[0]


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Samples of ``Q`` and ``Q'`` on ``r_i = i * dr``, ``0 <= r_i <= r_max``."""

    r: np.ndarray
    values: np.ndarray
    derivative: np.ndarray
    q0: float
    match_radius: float

    @property
    def dr(self) -> float:
        return float(self.r[1] - self.r[0])

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    def _radial_integral(self, f) -> float:
        return float(2 * np.pi * simpson(f * self.r, x=self.r))

    @cached_property
    def mass(self) -> float:
        """``rho* = ||Q||_2^2``."""
        return self._radial_integral(self.values**2)

    @cached_property
    def kinetic(self) -> float:
        return self._radial_integral(self.derivative**2)

    @cached_property
    def quartic(self) -> float:
        return self._radial_integral(self.values**4)

    @cached_property
    def second_moment(self) -> float:
        """``int |x|^2 Q^2``."""
        return self._radial_integral(self.r**2 * self.values**2)

    @cached_property
    def log_interaction(self) -> float:
        """``V0(Q) = iint ln|x-y| Q^2(x) Q^2(y)`` by the radial Newton formula.

        The angular mean of ``ln|x-y|`` over ``|y| = s`` is ``ln max(|x|, s)``, so
        ``Phi(r) = ln r * m(r) + 2 pi int_r^inf ln(s) Q^2 s ds`` with ``m`` the
        enclosed mass.
        """
        from scipy.integrate import cumulative_simpson

        r, q2 = self.r, self.values**2
        inner = 2 * np.pi * cumulative_simpson(q2 * r, x=r, initial=0.0)
        logs = np.log(np.where(r > 0, r, 1.0))
        tail_integrand = 2 * np.pi * logs * q2 * r
        cum = cumulative_simpson(tail_integrand, x=r, initial=0.0)
        outer = cum[-1] - cum
        phi = logs * inner + outer
        return self._radial_integral(phi * q2)

    @cached_property
    def C_Q(self) -> float:
        """The constant ``(1/4) iint ln|x-y| Q^2 Q^2`` of the energy asymptote."""
        return 0.25 * self.log_interaction

    @cached_property
    def _spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.r, self.values, self.derivative, extrapolate=False)

    def __call__(self, r) -> np.ndarray:
        """Cubic Hermite interpolation of ``Q``; zero beyond ``r_max``."""
        r = np.asarray(r, dtype=float)
        out = self._spline(np.minimum(r, self.r_max))
        return np.where(r > self.r_max, 0.0, out)

    def residual(self) -> float:
        """Max of ``|Q'' + Q'/r - Q + Q^3|`` on ``[dr, match_radius]`` from finite differences."""
        r, q, p = self.r, self.values, self.derivative
        stop = int(self.match_radius / self.dr)
        qpp = np.gradient(p, self.dr)
        res = qpp[1:stop] + p[1:stop] / r[1:stop] - q[1:stop] + q[1:stop] ** 3
        return float(np.max(np.abs(res[2:-2])))


def shoot_Q(
    tol: float = 1e-10,
    dr: float = 1e-4,
    r_max: float = 30.0,
    bracket: tuple[float, float] = (1.0, 4.0),
    tail_threshold: float = 1e-8,
) -> RadialProfile:
    """Compute the positive radial ground state by bisection shooting.

    Bisection runs until the bracket is narrower than ``tol`` and then keeps
    going to floating-point resolution, because the orbit must be trusted out
    to where ``Q`` falls below ``tail_threshold``.
    """
    if not 0 < tol <= 1e-8:
        raise ValueError(f"tol must lie in (0, 1e-8], got {tol}")
    if dr > 1e-4 or r_max < 20:
        raise ValueError("need dr <= 1e-4 and r_max >= 20")
    nsteps = int(round(r_max / dr))
    lo, hi = bracket
    if _classify(lo, dr, nsteps) != UNDERSHOOT or _classify(hi, dr, nsteps) != OVERSHOOT:
        raise ShootingError(f"no sign change of the shooting map in q0 in {bracket}")
    while True:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if _classify(mid, dr, nsteps) == OVERSHOOT:
            hi = mid
        else:
            lo = mid
    assert hi - lo < tol

    _, last_lo, Q_lo, P_lo = _integrate(lo, dr, nsteps, True)
    _, last_hi, Q_hi, P_hi = _integrate(hi, dr, nsteps, True)
    last = min(last_lo, last_hi)
    q, p = Q_lo[: last + 1], P_lo[: last + 1]
    # reliable while both bracket orbits agree and Q is above the stitching level
    spread = np.abs(Q_lo[: last + 1] - Q_hi[: last + 1])
    bad = (q < tail_threshold) | (spread > 1e-3 * np.abs(q))
    bad[: int(1.0 / dr)] = False
    stop = int(np.argmax(bad)) if bad.any() else last
    r = dr * np.arange(nsteps + 1)
    rm = r[stop]
    # c K0(r) tail, scaled to match Q at the stitching radius
    c = q[stop] / (k0e(rm) * np.exp(-rm))
    rt = r[stop:]
    Q = np.empty(nsteps + 1)
    P = np.empty(nsteps + 1)
    Q[:stop] = q[:stop]
    P[:stop] = p[:stop]
    Q[stop:] = c * k0e(rt) * np.exp(-rt)
    P[stop:] = -c * k1e(rt) * np.exp(-rt)
    return RadialProfile(r=r, values=Q, derivative=P, q0=0.5 * (lo + hi), match_radius=rm)


_CACHE: dict = {}


def cached_profile(tol: float = 1e-10, dr: float = 1e-4, r_max: float = 30.0) -> RadialProfile:
    """Process-level memo of :func:`shoot_Q`."""
    key = (tol, dr, r_max)
    if key not in _CACHE:
        _CACHE[key] = shoot_Q(tol=tol, dr=dr, r_max=r_max)
    return _CACHE[key]


def embed_Q(
    p: RadialProfile,
    g: Grid2D,
    center=(0.0, 0.0),
    alpha: float = 1.0,
    beta: float = 1.0,
    strict: bool = False,
    warn: bool = True,
) -> Field2D:
    """Sample ``beta * Q(alpha * |x - center|)`` on the grid.

    Returns the field; if the profile support ``r_max / alpha`` does not fit in
    the box a :class:`~planarsp.exceptions.TruncationWarning` is issued (or
    :class:`ValueError` raised when ``strict``; nothing when ``warn`` is off).
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    X, Y = g.coords
    reach = p.r_max / alpha + max(abs(center[0]), abs(center[1]))
    if reach > g.half_width:
        # the profile is effectively zero long before r_max; flag only real truncation
        edge_r = alpha * (g.half_width - max(abs(center[0]), abs(center[1])))
        if p(edge_r) > 1e-10 * p.q0:
            if strict:
                raise ValueError("embedded profile does not fit in the box")
            if warn:
                warnings.warn("embedded profile truncated by the box", TruncationWarning, stacklevel=2)
    R = np.hypot(X - center[0], Y - center[1])
    return Field2D(g, beta * p(alpha * R))


def linearized_apply(Qf: Field2D, v: Field2D) -> Field2D:
    """``(-Delta + 1 - 3 Q^2) v``."""
    return Field2D(v.grid, -laplacian(v).values + (1.0 - 3.0 * Qf.values**2) * v.values)


def kernel_residual(p: RadialProfile, g: Grid2D, mode: str = "dx1") -> float:
    """Relative residual ``||L v|| / ||v||`` for ``v`` a translation mode of ``Q``.

    ``mode`` is ``"dx1"`` or ``"dx2"`` for the kernel elements, or ``"Q"`` to
    apply the operator to ``Q`` itself (not a kernel element).
    """
    Qf = embed_Q(p, g)
    if mode == "Q":
        v = Qf
    else:
        d1, d2 = gradient(Qf)
        v = d1 if mode == "dx1" else d2
    Lv = linearized_apply(Qf, v)
    return float(np.sqrt(np.sum(Lv.values**2) / np.sum(v.values**2)))
