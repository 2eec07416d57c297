"""Acceptance checks, one function per criterion.

Each check returns a :class:`Criterion` with the measured values and the
tolerance it was held to.  Wall-clock times are kept apart from the measured
values so that reports are reproducible byte for byte.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import DEFAULT_FRACS, SweepRow, centering_check, nonexistence_probe, run_sweep
from .energy import gn_ratio
from .grid import Field2D, Grid2D, make_grid
from .groundstate import RadialProfile, embed_Q, kernel_residual, shoot_Q
from .logconv import build_log_kernel, direct_convolution, log_potential, momentum_identity_check
from .minimizer import SolveConfig, minimize, uniqueness_probe

__all__ = ["Criterion", "random_smooth_field", "CHECKS", "run_checks"]

SEED = 20240601


@dataclass
class Criterion:
    id: int
    title: str
    passed: bool
    measured: dict
    tolerance: str
    seconds: float = 0.0
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "passed": bool(self.passed),
            "measured": self.measured,
            "tolerance": self.tolerance,
            "note": self.note,
        }

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.id:2d}. {self.title}: {self.tolerance}"


def random_smooth_field(g: Grid2D, rng: np.random.Generator, modes: int = 6, width: float = 1.5) -> Field2D:
    """Sum of ``modes`` Gaussian bumps with random centres, widths and heights."""
    X, Y = g.coords
    out = np.zeros_like(X)
    for _ in range(modes):
        c = rng.uniform(-1.5, 1.5, size=2)
        s = rng.uniform(0.5, width)
        a = rng.uniform(0.2, 1.0)
        out += a * np.exp(-((X - c[0]) ** 2 + (Y - c[1]) ** 2) / (2 * s * s))
    return g.field(out)


def _monotone(vals, decreasing=True) -> bool:
    pairs = list(zip(vals, vals[1:]))
    return all((b < a) if decreasing else (b > a) for a, b in pairs)


def check_groundstate(ctx) -> Criterion:
    t = time.perf_counter()
    p = shoot_Q()
    secs = time.perf_counter() - t
    ctx["profile"] = p
    kin = abs(p.kinetic / p.mass - 1)
    quart = abs(p.quartic / (2 * p.mass) - 1)
    # reference: the same shooting at dr = 1e-5, r_max = 25
    dq0, drho = abs(p.q0 - 2.2062009), abs(p.mass - 11.7008965)
    ok = kin <= 1e-6 and quart <= 1e-6 and dq0 < 1e-4 and drho < 1e-3 and secs < 5
    return Criterion(
        1,
        "ground-state identities and shooting reference",
        ok,
        {"q0": p.q0, "rho_star": p.mass, "kinetic_rel_err": kin, "quartic_rel_err": quart,
         "q0_err": dq0, "rho_star_err": drho, "C_Q": p.C_Q},
        "identities <= 1e-6, |q0 - 2.20620| < 1e-4, |rho* - 11.7009| < 1e-3, < 5 s",
        secs,
    )


def check_convolution(ctx) -> Criterion:
    rng = np.random.default_rng(SEED)
    g = make_grid(2.0, 32)
    K = build_log_kernel(g)
    worst = 0.0
    for _ in range(3):
        f = g.field(rng.uniform(0, 1, size=(32, 32)))
        worst = max(worst, float(np.max(np.abs(log_potential(f, K).values - direct_convolution(f).values))))
    g2 = make_grid(8.0, 256)
    r = g2.radius
    bump = np.where(r < 1, (1 - r * r) ** 4, 0.0)
    m = 2.0
    dens = g2.field(bump * m / (g2.cell_area * bump.sum()))
    phi = log_potential(dens, build_log_kernel(g2)).values
    ring = (r >= 2) & (r <= g2.half_width / 2)
    far = float(np.max(np.abs(phi[ring] - m * np.log(r[ring])) / np.abs(m * np.log(r[ring]))))
    return Criterion(
        2,
        "log convolution: FFT vs direct sum, far field",
        worst < 1e-10 and far < 1e-3,
        {"max_abs_fft_minus_direct": worst, "far_field_max_rel_err": far},
        "direct-sum agreement < 1e-10 abs (n = 32), far field m ln|x| < 1e-3 rel on 2 <= |x| <= L/2",
    )


def check_momentum(ctx) -> Criterion:
    rng = np.random.default_rng(SEED + 1)
    g = make_grid(2.0, 32)
    rel = []
    for _ in range(3):
        u = g.field(rng.uniform(0, 1, size=(32, 32)))
        rel.append(abs(momentum_identity_check(u)) / u.mass**2)
    gq = make_grid(8.0, 256)
    Q = embed_Q(ctx["profile"], gq, warn=False)
    rel_q = abs(momentum_identity_check(Q)) / Q.mass**2
    return Criterion(
        3,
        "momentum identity",
        max(rel) < 1e-10 and rel_q < 1e-10,
        {"random_max_rel": max(rel), "Q_rel": rel_q},
        "|S - rho^2/2| < 1e-10 rho^2",
    )


def check_gn(ctx, samples: int = 24) -> Criterion:
    p = ctx["profile"]
    rng = np.random.default_rng(SEED + 2)
    g = make_grid(8.0, 128)
    ratios = []
    for _ in range(samples):
        u = random_smooth_field(g, rng, modes=int(rng.integers(1, 9)), width=float(rng.uniform(0.6, 2.0)))
        ratios.append(gn_ratio(u, p.mass))
    rq = gn_ratio(embed_Q(p, make_grid(8.0, 512), warn=False), p.mass)
    return Criterion(
        4,
        "Gagliardo-Nirenberg ratio",
        max(ratios) <= 1 + 1e-3 and abs(rq - 1) < 1e-3,
        {"samples": samples, "max_random_ratio": max(ratios), "Q_ratio": rq},
        "random fields <= 1 + 1e-3, Q within 1e-3 of 1",
    )


def check_stationarity(ctx) -> Criterion:
    p = ctx["profile"]
    out = {}
    ok = True
    for f in (0.5, 0.9):
        cfg = SolveConfig(rho=f * p.mass)
        t = time.perf_counter()
        a = minimize(cfg, profile=p)
        secs = time.perf_counter() - t
        b = minimize(SolveConfig(rho=cfg.rho, n=2 * cfg.grid(p.mass).n), profile=p)
        hist = a.energy_history[10:]
        mono = bool(np.all(np.diff(hist) <= 1e-12 * np.abs(hist[1:])))
        mass_err = abs(a.field.mass - a.rho) / a.rho
        agree = abs(a.e - b.e) / abs(b.e)
        row_ok = a.converged and a.residual < 1e-5 and mass_err < 1e-10 and mono and agree < 1e-3 and secs < 300
        ok &= bool(row_ok)
        out[f"{f:.1f}"] = {"converged": a.converged, "residual": a.residual, "mass_rel_err": mass_err,
                           "monotone_after_10": mono, "e": a.e, "e_doubled": b.e,
                           "doubled_rel_diff": agree, "iters": a.iters, "n": a.grid.n, "L": a.grid.half_width}
    return Criterion(
        5,
        "minimizer stationarity at 0.5 and 0.9 rho*",
        ok,
        out,
        "residual < 1e-5, mass err < 1e-10, monotone history, doubled-resolution energy within 1e-3",
    )


def _sweep(ctx) -> list[SweepRow]:
    if "rows" not in ctx:
        t = time.perf_counter()
        fracs = ctx.get("fracs") or DEFAULT_FRACS
        ctx["rows"] = run_sweep(fracs, workers=ctx.get("workers", 1), profile=ctx["profile"])
        ctx["sweep_seconds"] = time.perf_counter() - t
    return ctx["rows"]


def check_rate(ctx) -> Criterion:
    rows = _sweep(ctx)
    ratios = [r.eps_bar / r.eps_bar_pred for r in rows]
    dev = [abs(x - 1) for x in ratios]
    ok = all(r.converged for r in rows) and _monotone(dev) and dev[-1] < 0.15 and ctx["sweep_seconds"] < 1800
    return Criterion(
        6,
        "blow-up rate eps_bar / [2 (rho* - rho)^(1/2) / rho*]",
        ok,
        {"rho_frac": [r.rho_frac for r in rows], "ratio": ratios},
        "|ratio - 1| decreasing, < 0.15 at the largest fraction; sweep < 30 min",
        ctx["sweep_seconds"],
    )


def check_energy(ctx) -> Criterion:
    rows = _sweep(ctx)
    gaps = [abs(r.e - r.e_pred) / abs(r.e_pred) for r in rows]
    return Criterion(
        7,
        "energy asymptote",
        _monotone(gaps) and gaps[-1] < 0.05,
        {"rho_frac": [r.rho_frac for r in rows], "e": [r.e for r in rows],
         "e_pred": [r.e_pred for r in rows], "rel_gap": gaps, "C_Q": ctx["profile"].C_Q},
        "relative gap decreasing, < 5% at the largest fraction",
    )


def check_multiplier(ctx) -> Criterion:
    rows = _sweep(ctx)
    target = -1.0 / ctx["profile"].mass
    rel = [abs(r.mu_eps2 - target) / abs(target) for r in rows]
    return Criterion(
        8,
        "multiplier limit mu eps^2 -> -1/rho*",
        rel[-1] < 0.1,
        {"rho_frac": [r.rho_frac for r in rows], "mu_eps2": [r.mu_eps2 for r in rows],
         "target": target, "rel_err": rel},
        "within 10% of -1/rho* at the largest fraction",
        note="the correction to the limit decays only like eps^2 |ln eps|",
    )


def check_profile(ctx) -> Criterion:
    rows = _sweep(ctx)
    q0 = ctx["profile"].q0
    dinf = [r.profile_dist_inf for r in rows]
    dX = [r.profile_dist_X for r in rows]
    return Criterion(
        9,
        "rescaled profile converges to Q",
        _monotone(dinf) and _monotone(dX) and dinf[-1] < 0.1 * q0,
        {"rho_frac": [r.rho_frac for r in rows], "dist_inf": dinf, "dist_X": dX, "Q_max": q0},
        "both distances strictly decreasing, sup distance < 0.1 max Q at the largest fraction",
    )


def check_decay(ctx) -> Criterion:
    rows = [r for r in _sweep(ctx) if r.rho_frac >= 0.9 - 1e-12]
    bound = -2.0 / (3.0 * math.sqrt(ctx["profile"].mass)) + 0.05
    slopes = [r.decay_slope for r in rows]
    return Criterion(
        10,
        "exponential decay of the rescaled minimizer",
        all(s <= bound for s in slopes),
        {"rho_frac": [r.rho_frac for r in rows], "slope": slopes, "bound": bound},
        "fitted tail slope <= -2/(3 sqrt(rho*)) + 0.05 for fractions >= 0.9",
    )


def check_nonexistence(ctx) -> Criterion:
    p = ctx["profile"]
    rep = nonexistence_probe(p.mass, (1.0, 2.0, 4.0, 8.0), profile=p)
    return Criterion(
        11,
        "no minimizer at rho = rho*",
        rep["strictly_decreasing"] and rep["total_drop"] > 1.0 and len(rep["taus"]) == 4,
        {"taus": rep["taus"], "energies": rep["energies"], "total_drop": rep["total_drop"]},
        "E(u_tau) strictly decreasing on tau = 1, 2, 4, 8 with total drop > 1",
    )


def check_uniqueness(ctx) -> Criterion:
    p = ctx["profile"]
    rep = uniqueness_probe(0.99 * p.mass, 5, profile=p)
    ok = all(rep["converged"]) and rep["max_linf_rel"] < 1e-3 and rep["energy_spread_rel"] < 1e-6
    return Criterion(
        12,
        "local uniqueness probe at 0.99 rho*",
        ok,
        {k: rep[k] for k in ("seeds", "converged", "energies", "max_linf_rel", "energy_spread_rel")},
        "pairwise centered sup distance < 1e-3 max u, energy spread < 1e-6",
        note=rep["note"],
    )


def check_kernel(ctx) -> Criterion:
    p = ctx["profile"]
    g = make_grid(16.0, 512)
    r1 = kernel_residual(p, g, "dx1")
    r2 = kernel_residual(p, g, "dx2")
    rq = kernel_residual(p, g, "Q")
    return Criterion(
        13,
        "translation modes span the linearized kernel",
        max(r1, r2) < 1e-3 and rq > 0.5,
        {"dx1": r1, "dx2": r2, "Q": rq, "L": g.half_width, "n": g.n},
        "residual of L dQ/dx_i < 1e-3 at n = 512, residual of L Q > 0.5",
    )


CHECKS = {
    1: check_groundstate,
    2: check_convolution,
    3: check_momentum,
    4: check_gn,
    5: check_stationarity,
    6: check_rate,
    7: check_energy,
    8: check_multiplier,
    9: check_profile,
    10: check_decay,
    11: check_nonexistence,
    12: check_uniqueness,
    13: check_kernel,
}


def run_checks(
    ids=None,
    workers: int = 1,
    fracs=None,
    profile: RadialProfile | None = None,
    echo=None,
) -> tuple[list[Criterion], dict]:
    """Run the selected checks in order.

    Criterion 1 shoots the ground state that the others reuse, so it runs
    whenever no ``profile`` is given.  Returns the criteria and the shared
    context (profile, sweep rows).
    """
    ids = sorted(CHECKS) if ids is None else sorted(set(ids))
    ctx: dict = {"workers": workers, "fracs": fracs}
    out = []
    if 1 in ids or profile is None:
        c1 = check_groundstate(ctx)
        if 1 in ids:
            out.append(c1)
            if echo:
                echo(c1.line())
    if profile is not None:
        ctx["profile"] = profile
    for i in ids:
        if i == 1:
            continue
        t = time.perf_counter()
        c = CHECKS[i](ctx)
        c.seconds = c.seconds or time.perf_counter() - t
        out.append(c)
        if echo:
            echo(c.line())
    return out, ctx
