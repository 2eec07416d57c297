"""Constraint minimizers of the energy by mass-preserving gradient flow.

Each step is the semi-implicit update

    (I - tau Delta) u+ = u + tau (mu u + u^3 - V u - Phi[u^2] u)

followed by rescaling to the target mass, where ``mu`` is the multiplier of
the current iterate.  The update is a gradient step preconditioned by
``(1/tau - Delta)``.  ``tau`` is capped so that ``1 + tau (mu + u^2 - V - Phi)``
stays non-negative; this keeps the explicit part stable and positivity
preserving, and shrinks the step like the squared core width as the profile
concentrates.  Steps are extrapolated with a restarted
momentum term, and every few steps the iterate is translated to the position
minimizing the external-potential energy, which is the only term that pins
the location of the core.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from .energy import (
    EnergyBreakdown,
    el_residual,
    evaluate_energy,
    external_potential,
    lagrange_multiplier,
)
from .exceptions import ResolutionError, SupercriticalMassError
from .grid import Field2D, Grid2D, check_decay, grad_norm_sq, make_grid
from .groundstate import RadialProfile, cached_profile, embed_Q
from .logconv import KernelTable, build_log_kernel, log_potential

__all__ = [
    "SolveConfig",
    "SolveResult",
    "default_grid",
    "initial_scale",
    "minimize",
    "scaling_energy",
    "uniqueness_probe",
    "peak_location",
    "fourier_shift",
]

log = logging.getLogger(__name__)

INIT_KINDS = ("scaled-Q", "provided-field", "randomized-Q")


def default_grid(rho_frac: float) -> tuple[float, int]:
    """Box half width and points per side used when a config leaves them unset."""
    if rho_frac <= 0.95:
        return 8.0, 512
    return 8.0, 1024


@dataclass(frozen=True)
class SolveConfig:
    rho: float
    L: float | None = None
    n: int | None = None
    dt: float = 0.05
    max_iters: int = 4000
    energy_tol: float = 1e-10
    residual_tol: float = 1e-6
    init: str = "scaled-Q"
    seed: int = 0
    noise: float = 0.1
    momentum: bool = True
    recenter_every: int = 10
    allow_supercritical: bool = False
    positivity_floor: float = 1e-8

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not (self.energy_tol > 0 and self.residual_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.init not in INIT_KINDS:
            raise ValueError(f"init must be one of {INIT_KINDS}, got {self.init!r}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    def grid(self, rho_star: float) -> Grid2D:
        L0, n0 = default_grid(self.rho / rho_star)
        return make_grid(self.L if self.L is not None else L0, self.n if self.n is not None else n0)


@dataclass
class SolveResult:
    field: Field2D
    rho: float
    e: float
    mu: float
    eps: float
    eps_bar: float
    x_peak: tuple[float, float]
    residual: float
    iters: int
    energy_history: np.ndarray
    converged: bool
    breakdown: EnergyBreakdown
    flags: list = field(default_factory=list)

    @property
    def grid(self) -> Grid2D:
        return self.field.grid

    def summary(self) -> dict:
        g = self.grid
        return {
            "rho": self.rho,
            "L": g.half_width,
            "n": g.n,
            "e": self.e,
            "mu": self.mu,
            "eps": self.eps,
            "eps_bar": self.eps_bar,
            "x_peak": list(self.x_peak),
            "residual": self.residual,
            "iters": self.iters,
            "converged": self.converged,
            "energy": self.breakdown.as_dict(),
            "flags": list(self.flags),
        }


def initial_scale(rho: float, rho_star: float) -> float:
    """Width parameter ``tau = [rho rho* / 4 (rho* - rho)]^{1/2}`` of the optimal Q test function."""
    return float(np.sqrt(rho * rho_star / (4.0 * (rho_star - rho))))


def peak_location(u: Field2D) -> tuple[int, int]:
    """Grid index of ``max u``; ties go to the smallest row-major index."""
    return tuple(int(i) for i in np.unravel_index(np.argmax(u.values), u.values.shape))


def _shift_phases(g: Grid2D, a) -> np.ndarray:
    kx = g.wavenumbers.copy()
    kx[g.n // 2] = 0.0
    ky = kx[: g.n // 2 + 1]
    return np.exp(-1j * (kx[:, None] * a[0] + ky[None, :] * a[1]))


def fourier_shift(u: Field2D, a) -> Field2D:
    """``u(x - a)`` through the trigonometric interpolant."""
    g = u.grid
    return Field2D(g, g.irfft(g.rfft(u.values) * _shift_phases(g, a)))


def _optimal_shift(g: Grid2D, v: np.ndarray, iters: int = 30) -> np.ndarray:
    """Newton iteration for ``argmin_a int ln(1+|x+a|^2) v^2(x) dx``."""
    X, Y = g.coords
    d = v * v
    a = np.zeros(2)
    for _ in range(iters):
        xs, ys = X + a[0], Y + a[1]
        q = 1.0 + xs * xs + ys * ys
        grad = np.array([np.sum(d * xs / q), np.sum(d * ys / q)])
        hxy = np.sum(d * (-2 * xs * ys / q**2))
        hess = np.array(
            [[np.sum(d * (1 / q - 2 * xs * xs / q**2)), hxy], [hxy, np.sum(d * (1 / q - 2 * ys * ys / q**2))]]
        )
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            break
        a -= step
        if np.max(np.abs(step)) < 1e-15:
            break
    return a


def _smooth_noise(g: Grid2D, scale: float, rng: np.random.Generator, modes: int = 8) -> np.ndarray:
    X, Y = g.coords
    eta = np.zeros_like(X)
    for _ in range(modes):
        k = rng.normal(size=2)
        phase = rng.uniform(0, 2 * np.pi)
        eta += np.cos(scale * (k[0] * X + k[1] * Y) + phase)
    return eta / np.abs(eta).max()


def _initial_field(cfg: SolveConfig, g: Grid2D, p: RadialProfile, init_field) -> Field2D:
    rs = p.mass
    if cfg.init == "provided-field":
        if init_field is None:
            raise ValueError("init='provided-field' needs an initial field")
        u0 = init_field if isinstance(init_field, Field2D) else Field2D(g, init_field)
        if not u0.grid.same_as(g):
            raise ValueError("provided field is on a different grid")
        return u0.scaled_to_mass(cfg.rho)
    tau = initial_scale(cfg.rho, rs) if cfg.rho < rs else 1.0
    u0 = embed_Q(p, g, alpha=tau, beta=tau * np.sqrt(cfg.rho / rs), warn=False)
    if cfg.init == "randomized-Q":
        rng = np.random.default_rng(cfg.seed)
        u0 = u0.with_values(u0.values * (1.0 + cfg.noise * _smooth_noise(g, tau, rng)))
    return u0.scaled_to_mass(cfg.rho)


class _State:
    """Energy, multiplier and convolution potential of one iterate."""

    __slots__ = ("u", "phi", "breakdown", "E", "mu")

    def __init__(self, u: Field2D, K: KernelTable):
        self.u = u
        self.phi = log_potential(Field2D(u.grid, u.values**2), K)
        self.breakdown = evaluate_energy(u, K, self.phi)
        self.E = self.breakdown.total
        self.mu = lagrange_multiplier(u, self.E, K, V0=4.0 * self.breakdown.convolution)

    def residual(self) -> float:
        g = self.u.grid
        v = self.u.values
        lap = g.irfft(-g.k_squared * g.rfft(v))
        r = -lap + (external_potential(g) + self.phi.values - v * v - self.mu) * v
        return float(np.sqrt(np.sum(r * r) / np.sum(v * v)))


def _check_resolution(g: Grid2D, eps_bar: float, what: str) -> None:
    if g.spacing > eps_bar / 2:
        raise ResolutionError(
            f"{what}: spacing {g.spacing:.4g} exceeds half the core width {eps_bar:.4g}; increase n"
        )


def minimize(
    cfg: SolveConfig,
    K: KernelTable | None = None,
    profile: RadialProfile | None = None,
    init_field=None,
) -> SolveResult:
    """Minimize the energy on the sphere ``int u^2 = cfg.rho``."""
    p = profile if profile is not None else cached_profile()
    rs = p.mass
    if cfg.rho >= rs and cfg.init != "provided-field" and not cfg.allow_supercritical:
        raise SupercriticalMassError(
            f"rho = {cfg.rho:.6g} >= rho* = {rs:.6g}: no minimizer exists"
        )
    g = K.grid if K is not None else cfg.grid(rs)
    if K is None:
        K = build_log_kernel(g)
    u = _initial_field(cfg, g, p, init_field)
    _check_resolution(g, np.sqrt(rs / grad_norm_sq(u)), "initial field")
    V = external_potential(g)
    rho = cfg.rho
    flags: list[str] = []

    def project(w):
        return w * np.sqrt(rho / (g.cell_area * np.sum(w * w)))

    st = _State(Field2D(g, project(u.values)), K)
    history = [st.E]
    prev = st.u.values
    k = 0
    calm = 0
    res = st.residual()
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        if cfg.recenter_every and it % cfg.recenter_every == 1:
            a = _optimal_shift(g, st.u.values)
            if np.max(np.abs(a)) > 1e-13:
                cand = _State(Field2D(g, project(fourier_shift(st.u, a).values)), K)
                if cand.E <= st.E:
                    st, prev, k = cand, cand.u.values, 0
        v = st.u.values
        drift = st.mu - V - st.phi.values + v * v
        # keeps 1 + tau * drift >= 0, so the right-hand side stays positive
        tau = min(cfg.dt, 1.0 / max(-float(drift.min()), 1e-300))
        rhs = v + tau * drift * v
        w = g.irfft(g.rfft(rhs) / (1.0 + tau * g.k_squared))
        if cfg.momentum:
            k += 1
            wm = w + max(0.0, 1.0 - 3.0 / k) * (v - prev)
            if np.min(wm) < -cfg.positivity_floor * np.max(wm):
                k = 0
            else:
                w = wm
        cand = _State(Field2D(g, project(w)), K)
        if cfg.momentum and k > 1 and cand.E > st.E:
            # momentum overshoot: restart from a plain step
            k, prev = 0, v
            continue
        dE = abs(cand.E - st.E)
        prev, st = v, cand
        history.append(st.E)
        vmax = np.max(st.u.values)
        if np.min(st.u.values) < -cfg.positivity_floor * vmax:
            flags.append(f"positivity violated at iteration {it}")
            log.warning(flags[-1])
            break
        calm = calm + 1 if dE < cfg.energy_tol * abs(st.E) else 0
        res = st.residual()
        if calm >= 20 and res < cfg.residual_tol:
            converged = True
            break
        if not np.isfinite(st.E):
            flags.append("non-finite energy")
            break
    u = st.u
    eps = grad_norm_sq(u) ** -0.5
    eps_bar = np.sqrt(rs) * eps
    try:
        _check_resolution(g, eps_bar, "result")
    except ResolutionError as exc:
        flags.append(str(exc))
        converged = False
    if not check_decay(u):
        flags.append("boundary values above 1e-10 max|u|")
    if not converged and not flags:
        flags.append("not converged within max_iters")
    i, j = peak_location(u)
    return SolveResult(
        field=u,
        rho=rho,
        e=st.E,
        mu=st.mu,
        eps=float(eps),
        eps_bar=float(eps_bar),
        x_peak=(float(g.x1[i]), float(g.x1[j])),
        residual=float(el_residual(u, st.mu, K)),
        iters=it,
        energy_history=np.asarray(history),
        converged=converged,
        breakdown=st.breakdown,
        flags=flags,
    )


def scaling_energy(rho: float, tau: float, p: RadialProfile, g: Grid2D, K: KernelTable) -> float:
    """``E(u_tau)`` for the test function ``u_tau = tau (rho/rho*)^{1/2} Q(tau x)``."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    if tau * g.spacing > 0.5:
        raise ResolutionError(f"tau * h = {tau * g.spacing:.3g} > 0.5: core not resolved")
    u = embed_Q(p, g, alpha=tau, beta=tau * np.sqrt(rho / p.mass))
    return evaluate_energy(u, K).total


def scaling_energy_prediction(rho: float, tau: float, p: RadialProfile, external: float) -> float:
    """Closed form of ``E(u_tau)`` given ``external = 1/2 int ln(1+|x|^2) u_tau^2``."""
    rs = p.mass
    return (
        rho * (rs - rho) / (2 * rs) * tau**2
        + external
        + (rho / rs) ** 2 * p.C_Q
        - 0.25 * rho**2 * np.log(tau)
    )


def energy_asymptote(rho: float, p: RadialProfile) -> float:
    """Leading-order energy ``rho*^2/8 - rho*^2/4 ln rho* + rho*^2/8 ln[4(rho*-rho)] + C_Q``."""
    rs = p.mass
    return rs**2 / 8 - rs**2 / 4 * np.log(rs) + rs**2 / 8 * np.log(4 * (rs - rho)) + p.C_Q


def centered(u: Field2D, peak=None) -> np.ndarray:
    """Values rolled so the peak sits at the grid origin, then shifted sub-cell by the
    trigonometric interpolant so the interpolated maximum is at the origin."""
    g = u.grid
    i, j = peak_location(u) if peak is None else peak
    i0 = int(np.argmin(np.abs(g.x1)))
    v = np.roll(u.values, (i0 - i, i0 - j), axis=(0, 1))
    w = Field2D(g, v)
    a = -_subcell_peak(w, i0)
    return fourier_shift(w, a).values


def _subcell_peak(u: Field2D, i0: int) -> np.ndarray:
    """Offset of the interpolated maximum near node ``(i0, i0)`` by a quadratic fit."""
    v = u.values
    h = u.grid.spacing
    c = v[i0, i0]
    dx = (v[i0 + 1, i0] - v[i0 - 1, i0]) / (2 * h)
    dy = (v[i0, i0 + 1] - v[i0, i0 - 1]) / (2 * h)
    dxx = (v[i0 + 1, i0] - 2 * c + v[i0 - 1, i0]) / h**2
    dyy = (v[i0, i0 + 1] - 2 * c + v[i0, i0 - 1]) / h**2
    dxy = (v[i0 + 1, i0 + 1] - v[i0 + 1, i0 - 1] - v[i0 - 1, i0 + 1] + v[i0 - 1, i0 - 1]) / (4 * h * h)
    H = np.array([[dxx, dxy], [dxy, dyy]])
    try:
        return -np.linalg.solve(H, [dx, dy])
    except np.linalg.LinAlgError:
        return np.zeros(2)


def uniqueness_probe(
    rho: float,
    n_starts: int,
    cfg: SolveConfig | None = None,
    K: KernelTable | None = None,
    profile: RadialProfile | None = None,
) -> dict:
    """Solve from ``n_starts`` randomized-Q starts and compare the results.

    Distances are max-norm differences after centering each field at its
    peak; they are an empirical check, not a uniqueness proof.
    """
    p = profile if profile is not None else cached_profile()
    if rho >= p.mass:
        raise SupercriticalMassError("uniqueness probe needs rho < rho*")
    base = cfg if cfg is not None else SolveConfig(rho=rho)
    base = replace(base, rho=rho, init="randomized-Q")
    if K is None:
        K = build_log_kernel(base.grid(p.mass))
    results = []
    for s in range(n_starts):
        results.append(minimize(replace(base, seed=base.seed + s), K, p))
    ok = [r for r in results if r.converged]
    fields = [centered(r.field) for r in ok]
    vmax = max((float(np.max(f)) for f in fields), default=0.0)
    pairs = []
    for (a, fa), (b, fb) in combinations(enumerate(fields), 2):
        pairs.append({"i": a, "j": b, "linf": float(np.max(np.abs(fa - fb)))})
    energies = [r.e for r in ok]
    spread = (max(energies) - min(energies)) / abs(np.mean(energies)) if energies else 0.0
    max_dist = max((q["linf"] for q in pairs), default=0.0)
    return {
        "rho": rho,
        "n_starts": n_starts,
        "seeds": [base.seed + s for s in range(n_starts)],
        "converged": [r.converged for r in results],
        "energies": [r.e for r in results],
        "residuals": [r.residual for r in results],
        "x_peaks": [list(r.x_peak) for r in results],
        "pairs": pairs,
        "max_linf": max_dist,
        "max_linf_rel": max_dist / vmax if vmax else 0.0,
        "energy_spread_rel": float(spread),
        "note": "empirical comparison of independent solves; not a proof of uniqueness",
    }
