import dataclasses
import math

import numpy as np
import pytest

from planarsp.asymptotics import (
    centering_check,
    decay_check,
    decay_fit,
    nonexistence_probe,
    rescale_to_w,
    run_sweep,
)
from planarsp.exceptions import CenteringError
from planarsp.grid import Field2D, make_grid
from planarsp.groundstate import embed_Q
from planarsp.minimizer import SolveConfig


@pytest.fixture(scope="module")
def sweep(profile):
    rows, results = run_sweep((0.9, 0.8), profile=profile, return_results=True)
    return rows, results


def test_rows_sorted_and_consistent(sweep, rho_star):
    rows, _ = sweep
    assert [r.rho_frac for r in rows] == sorted(r.rho_frac for r in rows)
    for r in rows:
        assert r.converged
        assert r.eps_bar == pytest.approx(math.sqrt(rho_star) * r.eps, rel=1e-12)
        assert r.mu_eps2 == pytest.approx(r.mu * r.eps**2, rel=1e-12)
        values = [v for v in dataclasses.asdict(r).values() if isinstance(v, float)]
        assert all(math.isfinite(v) for v in values)


def test_sweep_rejects_bad_fractions(profile):
    with pytest.raises(ValueError):
        run_sweep((0.5, 1.0), profile=profile)


def test_rescaled_mass(sweep):
    _, results = sweep
    for res in results:
        for which in ("eps", "eps_bar"):
            w = rescale_to_w(res, which)
            assert w.mass == pytest.approx(res.rho, rel=1e-4)


def test_rescaled_profiles_approach_limits(sweep, profile):
    _, results = sweep
    s = math.sqrt(profile.mass)
    d_bar, d_eps = [], []
    for res in results:
        w_bar = rescale_to_w(res, "eps_bar")
        d_bar.append((w_bar - embed_Q(profile, w_bar.grid)).max_abs())
        w = rescale_to_w(res, "eps")
        limit = embed_Q(profile, w.grid, alpha=1 / s, beta=1 / s)
        d_eps.append((w - limit).max_abs())
    assert d_bar[1] < d_bar[0] and d_eps[1] < d_eps[0]
    assert d_bar[1] < 0.1 * profile.q0


def test_rescale_rejects_edge_peak(sweep):
    res = sweep[1][0]
    g = res.grid
    v = np.roll(res.field.values, (g.n // 2 - 1, 0), axis=(0, 1))
    edge = dataclasses.replace(res, field=Field2D(g, v))
    with pytest.raises(CenteringError):
        rescale_to_w(edge, "eps_bar")


def test_rescale_unknown_variant(sweep):
    with pytest.raises(ValueError):
        rescale_to_w(sweep[1][0], "eps_squared")


def test_decay_slope_of_q_matches_radial_fit(profile):
    s = math.sqrt(profile.mass)
    g = make_grid(12 * s, 256)
    w = embed_Q(profile, g, alpha=1 / s, beta=1 / s)
    r = np.linspace(6, 10, 400)
    ref = np.polyfit(r, np.log(profile(r / s) / s), 1)[0]
    fit = decay_fit(w)
    assert not fit.flagged
    assert fit.slope == pytest.approx(ref, abs=0.02)
    assert fit.slope < -1 / s  # the r^{-1/2} prefactor steepens the window slope


def test_decay_constant_field_flagged():
    g = make_grid(12.0, 64)
    fit = decay_fit(g.field(np.ones((64, 64))))
    assert fit.flagged


def test_decay_underflow_shrinks_window():
    g = make_grid(12.0, 128)
    fit = decay_fit(g.field(np.exp(-5.0 * g.radius)))
    assert fit.flagged and fit.r_hi < 10
    assert fit.slope == pytest.approx(-5.0, rel=1e-6)


def test_decay_bound_minimizers(sweep, rho_star):
    for res in sweep[1]:
        assert decay_check(res) <= -2 / (3 * math.sqrt(rho_star)) + 0.05


def test_sweep_invariants(sweep, profile):
    rows, _ = sweep
    lo, hi = rows
    assert hi.e <= lo.e
    assert lo.gn_ratio < hi.gn_ratio <= 1 + 1e-3
    assert hi.external < lo.external
    for r in rows:
        assert r.external <= 1.3 * r.eps_bar**2 * profile.second_moment


def test_centering(sweep):
    rep = centering_check(sweep[0])
    assert rep["within_one_cell"]
    assert rep["largest_fracs_within_half_cell"]
    assert len(rep["rows"]) == 2


def test_centering_empty():
    rep = centering_check([])
    assert rep["rows"] == []


def test_nonexistence_at_critical_mass(profile):
    rep = nonexistence_probe(profile.mass, profile=profile)
    assert rep["strictly_decreasing"]
    assert rep["drop_exceeds_one"]
    assert not rep["flags"]


def test_nonexistence_supercritical_gaps_larger(profile):
    at = nonexistence_probe(profile.mass, profile=profile)
    above = nonexistence_probe(1.1 * profile.mass, profile=profile)
    assert above["strictly_decreasing"]
    assert all(b > a for a, b in zip(at["gaps"][1:], above["gaps"][1:]))


def test_nonexistence_precondition(profile):
    with pytest.raises(ValueError):
        nonexistence_probe(0.5 * profile.mass, profile=profile)


def test_nonexistence_truncates_unresolved(profile):
    rep = nonexistence_probe(profile.mass, (1.0, 2.0, 4.0, 8.0), n=128, profile=profile)
    assert rep["taus"] == [1.0, 2.0, 4.0]
    assert rep["flags"]


def test_parallel_sweep_matches_serial(profile):
    base = SolveConfig(rho=1.0, L=8.0, n=128)
    serial = run_sweep((0.5, 0.6), base, workers=1, profile=profile)
    pooled = run_sweep((0.5, 0.6), base, workers=2, profile=profile)
    assert [r.as_dict() for r in serial] == [r.as_dict() for r in pooled]
