"""Blow-up diagnostics for minimizers as the mass approaches rho*.

A sweep solves at several mass fractions and records, per fraction, the
blow-up scale against ``2 (rho* - rho)^{1/2} / rho*``, the energy against its
leading-order asymptote, the scaled multiplier ``mu eps^2`` against
``-1/rho*``, and the distance of the rescaled profile from Q.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import scipy.fft as sfft

from .energy import gn_ratio, norms
from .exceptions import CenteringError, TruncationWarning
from .grid import Field2D, make_grid
from .groundstate import RadialProfile, cached_profile, embed_Q
from .logconv import build_log_kernel
from .minimizer import (
    SolveConfig,
    SolveResult,
    _subcell_peak,
    energy_asymptote,
    minimize,
    peak_location,
    scaling_energy,
)

__all__ = [
    "SweepRow",
    "DecayFit",
    "DEFAULT_FRACS",
    "peak_position",
    "rescale_to_w",
    "run_sweep",
    "centering_check",
    "decay_fit",
    "decay_check",
    "nonexistence_probe",
    "predicted_eps_bar",
]

log = logging.getLogger(__name__)

DEFAULT_FRACS = (0.80, 0.90, 0.95, 0.99)

# half width of the rescaled grid, in units where the limit profile is Q
W_EXTENT = 12.0
W_POINTS = 256


def predicted_eps_bar(rho: float, rho_star: float) -> float:
    return 2.0 * math.sqrt(rho_star - rho) / rho_star


@dataclass
class SweepRow:
    rho: float
    rho_frac: float
    e: float
    eps: float
    eps_bar: float
    eps_bar_pred: float
    mu: float
    mu_eps2: float
    x_peak_norm: float
    x_peak_scaled: float
    profile_dist_inf: float
    profile_dist_X: float
    e_pred: float
    decay_slope: float
    external: float
    gn_ratio: float
    residual: float
    iters: int
    h: float
    converged: bool
    flags: list = field(default_factory=list)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["flags"] = "; ".join(self.flags)
        return d


def peak_position(u: Field2D) -> np.ndarray:
    """Location of the maximum, refined below the grid spacing by a quadratic fit."""
    g = u.grid
    i, j = peak_location(u)
    if min(i, j) < 2 or max(i, j) > g.n - 3:
        raise CenteringError(f"peak at index {(i, j)} is within 2 cells of the boundary")
    v = np.roll(u.values, (g.n // 2 - i, g.n // 2 - j), axis=(0, 1))
    off = _subcell_peak(Field2D(g, v), g.n // 2)
    if np.max(np.abs(off)) > g.spacing:
        off = np.zeros(2)
    return np.array([g.x1[i], g.x1[j]]) + off


def _interp_matrix(g, pts: np.ndarray) -> np.ndarray:
    k = g.wavenumbers.copy()
    k[g.n // 2] = 0.0  # drop the unpaired Nyquist mode
    return np.exp(1j * np.outer(pts - g.x1[0], k))


def rescale_to_w(
    res: SolveResult,
    which: str = "eps_bar",
    extent: float = W_EXTENT,
    n: int = W_POINTS,
    rho_star: float | None = None,
) -> Field2D:
    """``w(x) = s u(s x + x_peak)`` with ``s`` = ``eps`` or ``eps_bar``.

    The result lives on a grid of half width ``extent`` in the ``eps_bar``
    variable, which is ``extent * sqrt(rho*)`` in the ``eps`` variable, so
    both variants cover the same physical disc.  Values come from the
    trigonometric interpolant of ``u``; points outside the solve box are 0.
    """
    if which not in ("eps", "eps_bar"):
        raise ValueError("which must be 'eps' or 'eps_bar'")
    u = res.field
    g = u.grid
    if rho_star is None:
        rho_star = res.eps_bar**2 / res.eps**2
    s = res.eps if which == "eps" else res.eps_bar
    half = extent if which == "eps_bar" else extent * math.sqrt(rho_star)
    gw = make_grid(half, n)
    x0 = peak_position(u)
    px = s * gw.x1 + x0[0]
    py = s * gw.x1 + x0[1]
    coeffs = sfft.fft2(u.values) / g.n**2
    vals = (_interp_matrix(g, px) @ coeffs @ _interp_matrix(g, py).T).real
    L = g.half_width
    inside = ((px >= -L) & (px < L))[:, None] & ((py >= -L) & (py < L))[None, :]
    return Field2D(gw, s * np.where(inside, vals, 0.0))


@dataclass(frozen=True)
class DecayFit:
    slope: float
    r_lo: float
    r_hi: float
    flagged: bool
    reason: str = ""


def decay_fit(w: Field2D, r_lo: float = 6.0, r_hi: float = 10.0, floor: float = 1e-14) -> DecayFit:
    """Least-squares slope of ``log w`` against ``|x|`` on the shell ``[r_lo, r_hi]``.

    Values below ``floor * max w`` are treated as underflow; the window is
    cut back to where the field is above it, and the fit is flagged.
    """
    r = w.grid.radius
    v = w.values
    vmax = float(np.max(np.abs(v)))
    good = v > floor * vmax
    reason = ""
    hi = r_hi
    shell = (r >= r_lo) & (r <= hi)
    if not np.all(good[shell]):
        bad = r[shell & ~good]
        hi = float(bad.min()) - w.grid.spacing
        shell = (r >= r_lo) & (r <= hi) & good
        reason = f"tail underflow, window cut to [{r_lo}, {hi:.3g}]"
    if np.count_nonzero(shell) < 3:
        return DecayFit(float("nan"), r_lo, hi, True, reason or "empty fit window")
    slope = float(np.polyfit(r[shell], np.log(v[shell]), 1)[0])
    if not slope < 0:
        reason = reason or "no decay in the fit window"
    return DecayFit(slope, r_lo, hi, bool(reason), reason)


def decay_check(res: SolveResult, rho_star: float | None = None) -> float:
    """Tail slope of the ``eps``-rescaled minimizer on ``6 <= |x| <= 10``."""
    fit = decay_fit(rescale_to_w(res, "eps", rho_star=rho_star))
    if fit.flagged:
        log.warning("decay fit: %s", fit.reason)
    return fit.slope


def _solve_row(args) -> tuple:
    cfg, profile = args
    return cfg, minimize(cfg, profile=profile)


def _row(res: SolveResult, p: RadialProfile) -> SweepRow:
    rs = p.mass
    rho = res.rho
    flags = list(res.flags)
    dist_inf = dist_X = slope = float("nan")
    try:
        w_bar = rescale_to_w(res, "eps_bar", rho_star=rs)
        diff = w_bar - embed_Q(p, w_bar.grid, warn=False)
        dist_inf = diff.max_abs()
        dist_X = norms(diff).x_norm
        fit = decay_fit(rescale_to_w(res, "eps", rho_star=rs))
        slope = fit.slope
        if fit.flagged:
            flags.append(f"decay fit: {fit.reason}")
    except CenteringError as exc:
        flags.append(str(exc))
    x_norm = float(np.hypot(*res.x_peak))
    return SweepRow(
        rho=rho,
        rho_frac=rho / rs,
        e=res.e,
        eps=res.eps,
        eps_bar=res.eps_bar,
        eps_bar_pred=predicted_eps_bar(rho, rs),
        mu=res.mu,
        mu_eps2=res.mu * res.eps**2,
        x_peak_norm=x_norm,
        x_peak_scaled=x_norm / math.sqrt(rs - rho),
        profile_dist_inf=float(dist_inf),
        profile_dist_X=float(dist_X),
        e_pred=float(energy_asymptote(rho, p)),
        decay_slope=float(slope),
        external=2.0 * res.breakdown.external,
        gn_ratio=float(gn_ratio(res.field, rs)),
        residual=res.residual,
        iters=res.iters,
        h=res.grid.spacing,
        converged=res.converged,
        flags=flags,
    )


def run_sweep(
    rho_fracs=DEFAULT_FRACS,
    base_cfg: SolveConfig | None = None,
    workers: int = 1,
    profile: RadialProfile | None = None,
    return_results: bool = False,
):
    """One solve per mass fraction; rows come back sorted by ``rho_frac``.

    ``base_cfg`` supplies everything except ``rho``.  Unset ``L``/``n`` follow
    ``default_grid`` for each fraction.  Non-converged solves stay in the
    table with their flags.
    """
    p = profile if profile is not None else cached_profile()
    rs = p.mass
    fracs = sorted(float(f) for f in rho_fracs)
    if any(not 0 < f < 1 for f in fracs):
        raise ValueError("sweep fractions must lie in (0, 1)")
    base = base_cfg if base_cfg is not None else SolveConfig(rho=rs / 2)
    jobs = [(replace(base, rho=f * rs), p) for f in fracs]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            done = list(ex.map(_solve_row, jobs))
    else:
        done = [_solve_row(j) for j in jobs]
    results = [r for _, r in done]
    for r in results:
        if not r.converged:
            log.warning("rho = %.6g not converged: %s", r.rho, "; ".join(r.flags))
    rows = [_row(r, p) for r in results]
    return (rows, results) if return_results else rows


def centering_check(rows: list[SweepRow]) -> dict:
    """Scaled peak offsets, and whether the two largest fractions sit within half a cell of 0."""
    ok = sorted((r for r in rows if r.converged), key=lambda r: r.rho_frac)
    top = ok[-2:]
    within = [r.x_peak_norm < 0.5 * r.h for r in top]
    return {
        "rows": [
            {"rho_frac": r.rho_frac, "x_peak_norm": r.x_peak_norm, "x_peak_scaled": r.x_peak_scaled}
            for r in ok
        ],
        "largest_fracs_within_half_cell": bool(top) and all(within),
        "within_one_cell": all(r.x_peak_norm <= r.h * (1 + 1e-12) for r in ok),
    }


def nonexistence_probe(
    rho: float,
    taus=(1.0, 2.0, 4.0, 8.0),
    L: float = 8.0,
    n: int = 512,
    profile: RadialProfile | None = None,
) -> dict:
    """Energies of the Q test functions ``u_tau`` at mass ``rho >= rho*``.

    Widths whose core is not resolved on the grid (``tau h > 0.5``) are
    dropped from the end of the list and reported.
    """
    p = profile if profile is not None else cached_profile()
    rs = p.mass
    if rho < rs * (1 - 1e-12):
        raise ValueError(f"nonexistence probe needs rho >= rho* = {rs:.8g}, got {rho:.8g}")
    taus = [float(t) for t in taus]
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError("taus must be increasing")
    g = make_grid(L, n)
    K = build_log_kernel(g)
    kept = [t for t in taus if t * g.spacing <= 0.5]
    flags = []
    if len(kept) < len(taus):
        flags.append(f"dropped unresolved taus {taus[len(kept):]}")
    notes = []
    energies = []
    for t in kept:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", TruncationWarning)
            energies.append(scaling_energy(rho, t, p, g, K))
        if caught:
            notes.append(f"tau = {t:g}: Q tail cut by the box at {p(t * L):.2e}")
    tail = energies[1:]
    decreasing = all(b < a for a, b in zip(tail, tail[1:])) and len(energies) >= 2
    drop = energies[0] - energies[-1] if energies else 0.0
    return {
        "rho": rho,
        "rho_frac": rho / rs,
        "taus": kept,
        "energies": energies,
        "strictly_decreasing": bool(decreasing and all(b < a for a, b in zip(energies, energies[1:]))),
        "decreasing_beyond_second": bool(decreasing),
        "total_drop": drop,
        "drop_exceeds_one": bool(drop > 1.0),
        "gaps": [a - b for a, b in zip(energies, energies[1:])],
        "flags": flags,
        "notes": notes,
    }
