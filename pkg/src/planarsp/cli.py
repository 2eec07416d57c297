"""Command-line interface.

Subcommands: groundstate, solve, sweep, verify, probe-uniqueness,
probe-nonexistence.  Settings come from built-in defaults, then an optional
flat JSON config file (``--config``), then command-line flags; later sources
win.  Every run writes its resolved settings to ``config.json`` in the output
directory, which defaults to ``$PLANARSP_OUT`` or ``./planarsp-out``.

Exit status: 0 on success, 1 when a solve does not converge or a verify
criterion fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import DEFAULT_FRACS, centering_check, nonexistence_probe, run_sweep
from .exceptions import InvalidGridError
from .groundstate import RadialProfile, shoot_Q
from .minimizer import INIT_KINDS, SolveConfig, minimize, uniqueness_probe
from .storage import atomic_write, dump_field, load_field, write_csv, write_json
from .svgplot import line_chart
from .verify import run_checks

log = logging.getLogger("planarsp")

COMMANDS = ("groundstate", "solve", "sweep", "verify", "probe-uniqueness", "probe-nonexistence")
OUT_ENV = "PLANARSP_OUT"
CACHE_ENV = "PLANARSP_CACHE"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    rho: float | None = None
    rho_frac: float | None = None
    L: float | None = None
    n: int | None = None
    dt: float = 0.05
    tol: float = 1e-6
    energy_tol: float = 1e-10
    max_iters: int = 4000
    init: str = "scaled-Q"
    init_field: str | None = None
    seed: int = 0
    out: str = ""
    workers: int = 1
    fracs: list = field(default_factory=lambda: list(DEFAULT_FRACS))
    starts: int = 5
    taus: list = field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0])
    field_format: str = "text"
    dr: float = 1e-4
    r_max: float = 30.0
    shoot_tol: float = 1e-10
    checks: list | None = None

    def solve_config(self, rho: float) -> SolveConfig:
        return SolveConfig(
            rho=rho,
            L=self.L,
            n=self.n,
            dt=self.dt,
            max_iters=self.max_iters,
            energy_tol=self.energy_tol,
            residual_tol=self.tol,
            init=self.init,
            seed=self.seed,
        )


FILE_KEYS = {f.name for f in fields(RunConfig)} - {"command"}


# ---------------------------------------------------------------- parsing


def _positive(kind):
    def conv(s):
        try:
            v = kind(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a valid {kind.__name__}: {s!r}")
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s}")
        return v

    return conv


def _float_list(s):
    try:
        return [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}")


def _int_list(s):
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat JSON file of settings; flags override it")
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./planarsp-out)")
    common.add_argument("--dr", type=_positive(float), help="radial step of the ground-state shooting")
    common.add_argument("--r-max", dest="r_max", type=_positive(float))
    common.add_argument("--shoot-tol", dest="shoot_tol", type=_positive(float))
    common.add_argument("-v", "--verbose", action="store_true")

    solve = _Parser(add_help=False)
    solve.add_argument("--rho", type=_positive(float), help="target mass")
    solve.add_argument("--rho-frac", dest="rho_frac", type=_positive(float), help="target mass as a fraction of rho*")
    solve.add_argument("--L", type=_positive(float), help="box half width")
    solve.add_argument("--n", type=_positive(int), help="points per side (power of two)")
    solve.add_argument("--dt", type=_positive(float), help="time step")
    solve.add_argument("--tol", type=_positive(float), help="Euler-Lagrange residual tolerance")
    solve.add_argument("--energy-tol", dest="energy_tol", type=_positive(float))
    solve.add_argument("--max-iters", dest="max_iters", type=_positive(int))
    solve.add_argument("--seed", type=int)

    parser = _Parser(prog="planarsp", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    sub.add_parser("groundstate", parents=[common], help="shoot the radial ground state Q")

    p = sub.add_parser("solve", parents=[common, solve], help="compute one constraint minimizer")
    p.add_argument("--init", choices=INIT_KINDS)
    p.add_argument("--init-field", dest="init_field", help="field dump used with --init provided-field")
    p.add_argument("--field-format", dest="field_format", choices=("text", "binary"))

    p = sub.add_parser("sweep", parents=[common, solve], help="solve along mass fractions")
    p.add_argument("--fracs", type=_float_list, help="comma-separated fractions of rho*")
    p.add_argument("--workers", type=_positive(int))

    p = sub.add_parser("verify", parents=[common], help="run the acceptance criteria and write a report")
    p.add_argument("--fracs", type=_float_list, help="sweep fractions (default 0.8,0.9,0.95,0.99)")
    p.add_argument("--workers", type=_positive(int))
    p.add_argument("--checks", type=_int_list, help="comma-separated criterion numbers (default all)")

    p = sub.add_parser("probe-uniqueness", parents=[common, solve], help="multi-start comparison of minimizers")
    p.add_argument("--starts", type=_positive(int))

    p = sub.add_parser("probe-nonexistence", parents=[common], help="energies of Q test functions at rho >= rho*")
    p.add_argument("--rho", type=_positive(float))
    p.add_argument("--rho-frac", dest="rho_frac", type=_positive(float))
    p.add_argument("--taus", type=_float_list)
    p.add_argument("--L", type=_positive(float))
    p.add_argument("--n", type=_positive(int))
    return parser


def _read_config_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(data) - FILE_KEYS)
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
    return data


def _check_value(key, value):
    """Type and range check for one resolved setting; raises UsageError naming ``key``."""
    if value is None:
        return None
    try:
        if key in ("rho", "rho_frac", "L", "dt", "tol", "energy_tol", "dr", "r_max", "shoot_tol"):
            v = float(value)
            if isinstance(value, bool) or not v > 0 or not math.isfinite(v):
                raise ValueError
            return v
        if key in ("n", "max_iters", "workers", "starts"):
            if isinstance(value, bool) or int(value) != value or int(value) < 1:
                raise ValueError
            return int(value)
        if key == "seed":
            if isinstance(value, bool) or int(value) != value:
                raise ValueError
            return int(value)
        if key in ("fracs", "taus"):
            vals = [float(x) for x in value]
            if not vals:
                raise ValueError
            return vals
        if key == "checks":
            return [int(x) for x in value]
        if key == "init" and value not in INIT_KINDS:
            raise ValueError
        if key == "field_format" and value not in ("text", "binary"):
            raise ValueError
        return str(value)
    except (TypeError, ValueError):
        raise UsageError(f"invalid value for {key}: {value!r}")


def parse_config(argv=None, file: str | None = None) -> RunConfig:
    """Resolve a :class:`RunConfig` from flags, an optional config file and defaults."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command is None:
        raise UsageError("missing subcommand; choose one of " + ", ".join(COMMANDS))
    flags = {k: v for k, v in vars(ns).items() if v is not None and k in FILE_KEYS}
    path = file or ns.config
    merged = _read_config_file(path) if path else {}
    merged.update(flags)
    resolved = {k: _check_value(k, v) for k, v in merged.items()}
    cfg = RunConfig(command=ns.command, **resolved)
    if cfg.rho is not None and cfg.rho_frac is not None:
        raise UsageError("rho and rho_frac are mutually exclusive")
    if not cfg.out:
        cfg.out = os.environ.get(OUT_ENV, "planarsp-out")
    if cfg.init == "provided-field" and not cfg.init_field:
        raise UsageError("init_field is required with init = provided-field")
    if cfg.command in ("sweep", "verify") and any(not 0 < f < 1 for f in cfg.fracs):
        raise UsageError(f"invalid value for fracs: {cfg.fracs} (need 0 < f < 1)")
    if cfg.command == "probe-nonexistence" and any(b <= a for a, b in zip(cfg.taus, cfg.taus[1:])):
        raise UsageError(f"invalid value for taus: {cfg.taus} (must increase)")
    if cfg.n is not None and cfg.n & (cfg.n - 1):
        raise UsageError(f"invalid value for n: {cfg.n} (need a power of two)")
    if cfg.checks is not None:
        bad = [c for c in cfg.checks if not 1 <= c <= 13]
        if bad:
            raise UsageError(f"invalid value for checks: {bad}")
    return cfg


# ---------------------------------------------------------- profile cache


def _cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "planarsp")


def profile_key(dr: float, r_max: float, tol: float) -> str:
    blob = json.dumps({"dr": dr, "r_max": r_max, "tol": tol, "version": __version__}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_profile(dr: float = 1e-4, r_max: float = 30.0, tol: float = 1e-10) -> RadialProfile:
    """Ground state from the on-disk cache, shooting (and caching) on a miss."""
    path = _cache_dir() / f"groundstate-{profile_key(dr, r_max, tol)}.npz"
    if path.exists():
        try:
            with np.load(path) as z:
                return RadialProfile(z["r"], z["values"], z["derivative"], float(z["q0"]), float(z["match_radius"]))
        except (OSError, KeyError, ValueError):
            log.warning("ignoring unreadable cache file %s", path)
    p = shoot_Q(tol=tol, dr=dr, r_max=r_max)
    try:
        buf = io.BytesIO()
        np.savez(buf, r=p.r, values=p.values, derivative=p.derivative, q0=p.q0, match_radius=p.match_radius)
        atomic_write(path, buf.getvalue())
    except OSError as exc:
        log.warning("could not cache ground state: %s", exc)
    return p


# ---------------------------------------------------------------- commands


def _resolve_rho(cfg: RunConfig, p: RadialProfile, default_frac: float | None = None) -> float:
    if cfg.rho is not None:
        return cfg.rho
    frac = cfg.rho_frac if cfg.rho_frac is not None else default_frac
    if frac is None:
        raise UsageError("one of rho or rho_frac is required")
    return frac * p.mass


def _profile_summary(p: RadialProfile) -> dict:
    return {
        "q0": p.q0,
        "rho_star": p.mass,
        "kinetic": p.kinetic,
        "quartic": p.quartic,
        "kinetic_over_mass": p.kinetic / p.mass,
        "quartic_over_mass": p.quartic / p.mass,
        "second_moment": p.second_moment,
        "C_Q": p.C_Q,
        "ode_residual": p.residual(),
        "match_radius": p.match_radius,
        "dr": p.dr,
        "r_max": p.r_max,
    }


def cmd_groundstate(cfg: RunConfig, out: Path, p: RadialProfile) -> int:
    step = max(1, int(round(0.01 / p.dr)))
    rows = [{"r": float(r), "Q": float(q), "dQ": float(d)}
            for r, q, d in zip(p.r[::step], p.values[::step], p.derivative[::step])]
    write_csv(out / "profile.csv", rows)
    write_json(out / "summary.json", _profile_summary(p))
    print(f"q0 = {p.q0:.10f}  rho* = {p.mass:.10f}  C_Q = {p.C_Q:.10f}")
    return 0


def _result_json(res, cfg_used: SolveConfig) -> dict:
    d = res.summary()
    d["config"] = asdict(cfg_used)
    d["energy_history"] = res.energy_history
    return d


def cmd_solve(cfg: RunConfig, out: Path, p: RadialProfile) -> int:
    rho = _resolve_rho(cfg, p)
    scfg = cfg.solve_config(rho)
    init = None
    if cfg.init == "provided-field":
        init = load_field(cfg.init_field, L=cfg.L, n=cfg.n)
        scfg = replace(scfg, L=init.grid.half_width, n=init.grid.n)
    res = minimize(scfg, profile=p, init_field=init)
    write_json(out / "result.json", _result_json(res, scfg))
    name = "field.txt" if cfg.field_format == "text" else "field.bin"
    dump_field(out / name, res.field, cfg.field_format)
    print(f"rho = {rho:.8g}  e = {res.e:.10g}  mu = {res.mu:.8g}  eps_bar = {res.eps_bar:.6g}  "
          f"residual = {res.residual:.2e}  iters = {res.iters}  converged = {res.converged}")
    for f in res.flags:
        print(f"  flag: {f}")
    return 0 if res.converged else 1


def _sweep_outputs(out: Path, rows) -> None:
    write_csv(out / "sweep.csv", [r.as_dict() for r in rows])


def cmd_sweep(cfg: RunConfig, out: Path, p: RadialProfile) -> int:
    base = cfg.solve_config(p.mass / 2)
    rows = run_sweep(cfg.fracs, base, workers=cfg.workers, profile=p)
    _sweep_outputs(out, rows)
    for r in rows:
        print(f"{r.rho_frac:.4f}  e = {r.e:.8g}  eps_bar/pred = {r.eps_bar / r.eps_bar_pred:.4f}  "
              f"mu eps^2 = {r.mu_eps2:.5f}  converged = {r.converged}")
    return 0 if all(r.converged for r in rows) else 1


def _plots(out: Path, rows, rho_star: float) -> None:
    x = [r.rho_frac for r in rows]
    charts = {
        "energy.svg": line_chart(
            [("e(rho)", x, [r.e for r in rows], False), ("asymptote", x, [r.e_pred for r in rows], True)],
            "energy against its asymptote", "rho / rho*", "energy"),
        "eps_bar.svg": line_chart(
            [("eps_bar", x, [r.eps_bar for r in rows], False),
             ("2 (rho* - rho)^1/2 / rho*", x, [r.eps_bar_pred for r in rows], True)],
            "blow-up scale", "rho / rho*", "eps_bar"),
        "mu_eps2.svg": line_chart(
            [("mu eps^2", x, [r.mu_eps2 for r in rows], False),
             ("-1/rho*", x, [-1.0 / rho_star] * len(rows), True)],
            "scaled multiplier", "rho / rho*", "mu eps^2"),
        "profile_distance.svg": line_chart(
            [("sup norm", x, [r.profile_dist_inf for r in rows], False),
             ("X norm", x, [r.profile_dist_X for r in rows], False)],
            "distance of the rescaled profile from Q", "rho / rho*", "distance"),
    }
    for name, svg in charts.items():
        atomic_write(out / name, svg)


def cmd_verify(cfg: RunConfig, out: Path, p: RadialProfile) -> int:
    checks = cfg.checks
    crit, ctx = run_checks(checks, workers=cfg.workers, fracs=cfg.fracs, echo=print)
    rows = ctx.get("rows")
    report = {
        "criteria": [c.as_dict() for c in crit],
        "all_passed": all(c.passed for c in crit),
        "rho_star": ctx["profile"].mass,
        "C_Q": ctx["profile"].C_Q,
        "C_Q_provenance": "1/4 iint ln|x-y| Q^2 Q^2 from the shot ground state",
    }
    if rows:
        report["centering"] = centering_check(rows)
        _sweep_outputs(out, rows)
        _plots(out, rows, ctx["profile"].mass)
    write_json(out / "report.json", report)
    write_json(out / "timings.json", {str(c.id): c.seconds for c in crit})
    n_fail = sum(not c.passed for c in crit)
    print(f"{len(crit) - n_fail}/{len(crit)} criteria passed")
    return 0 if n_fail == 0 else 1


def cmd_uniqueness(cfg: RunConfig, out: Path, p: RadialProfile) -> int:
    rho = _resolve_rho(cfg, p, default_frac=0.99)
    if rho >= p.mass:
        raise UsageError("probe-uniqueness needs rho < rho*")
    rep = uniqueness_probe(rho, cfg.starts, replace(cfg.solve_config(rho), init="randomized-Q"), profile=p)
    write_json(out / "uniqueness.json", rep)
    print(f"max centered distance / max u = {rep['max_linf_rel']:.3e}  "
          f"energy spread = {rep['energy_spread_rel']:.3e}  ({rep['note']})")
    return 0


def cmd_nonexistence(cfg: RunConfig, out: Path, p: RadialProfile) -> int:
    rho = _resolve_rho(cfg, p, default_frac=1.0)
    if rho < p.mass * (1 - 1e-12):
        raise UsageError("probe-nonexistence needs rho >= rho*")
    rep = nonexistence_probe(rho, cfg.taus, L=cfg.L or 8.0, n=cfg.n or 512, profile=p)
    write_json(out / "nonexistence.json", rep)
    for t, e in zip(rep["taus"], rep["energies"]):
        print(f"tau = {t:g}  E = {e:.8g}")
    return 0


HANDLERS = {
    "groundstate": cmd_groundstate,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "probe-uniqueness": cmd_uniqueness,
    "probe-nonexistence": cmd_nonexistence,
}


def run(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise UsageError(f"output directory {out} is not writable: {exc}")
    write_json(out / "config.json", asdict(cfg))
    t = time.perf_counter()
    p = load_profile(cfg.dr, cfg.r_max, cfg.shoot_tol)
    code = HANDLERS[cfg.command](cfg, out, p)
    log.info("%s finished in %.1f s", cfg.command, time.perf_counter() - t)
    return code


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    logging.basicConfig(level=logging.INFO if ("-v" in argv or "--verbose" in argv) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(argv)
        return run(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        build_parser().print_usage(sys.stderr)
        return 2
    except (InvalidGridError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
