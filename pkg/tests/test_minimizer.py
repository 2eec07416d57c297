import numpy as np
import pytest

from planarsp.energy import el_residual, gn_ratio, lagrange_multiplier
from planarsp.exceptions import ResolutionError, SupercriticalMassError
from planarsp.grid import make_grid
from planarsp.groundstate import embed_Q
from planarsp.logconv import build_log_kernel
from planarsp.minimizer import (
    SolveConfig,
    centered,
    default_grid,
    energy_asymptote,
    fourier_shift,
    initial_scale,
    minimize,
    peak_location,
    scaling_energy,
    uniqueness_probe,
)


@pytest.fixture(scope="module")
def half(profile):
    return minimize(SolveConfig(rho=0.5 * profile.mass), profile=profile)


@pytest.fixture(scope="module")
def half_fine(profile):
    return minimize(SolveConfig(rho=0.5 * profile.mass, n=1024), profile=profile)


@pytest.fixture(scope="module")
def ninety(profile):
    return minimize(SolveConfig(rho=0.9 * profile.mass), profile=profile)


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(rho=-1.0)
    with pytest.raises(ValueError):
        SolveConfig(rho=1.0, dt=0.0)
    with pytest.raises(ValueError):
        SolveConfig(rho=1.0, energy_tol=0.0)
    with pytest.raises(ValueError):
        SolveConfig(rho=1.0, init="gaussian")


def test_default_grid_resolves_core(rho_star):
    for f in (0.5, 0.8, 0.9, 0.95, 0.99):
        L, n = default_grid(f)
        eps_bar = 2 * np.sqrt(rho_star * (1 - f)) / rho_star
        assert 2 * L / n <= eps_bar / 2


def test_initial_scale(rho_star):
    assert initial_scale(0.9 * rho_star, rho_star) == pytest.approx(np.sqrt(0.9 * rho_star**2 / (0.4 * rho_star)))


@pytest.mark.parametrize("name", ["half", "ninety"])
def test_converged_and_stationary(request, name, rho_star):
    res = request.getfixturevalue(name)
    assert res.converged, res.flags
    assert res.residual < 1e-5
    assert abs(res.field.mass - res.rho) / res.rho < 1e-10
    assert np.isfinite(res.e)
    assert res.eps_bar == pytest.approx(np.sqrt(rho_star) * res.eps, rel=1e-12)


@pytest.mark.parametrize("name", ["half", "ninety"])
def test_energy_history_monotone(request, name):
    hist = request.getfixturevalue(name).energy_history
    tail = hist[10:]
    assert np.all(np.diff(tail) <= 1e-12 * np.abs(tail[1:]))


def test_positive(half):
    v = half.field.values
    assert v.min() > -1e-8 * v.max()


def test_multiplier_consistency(half, profile):
    K = build_log_kernel(half.grid)
    mu = lagrange_multiplier(half.field, half.e, K)
    assert mu == pytest.approx(half.mu, rel=1e-12)
    assert el_residual(half.field, mu, K) < 1e-5


def test_symmetric_about_peak(half):
    u = centered(half.field)
    i0 = half.grid.n // 2
    core = u[1:, 1:]
    assert abs(half.x_peak[0]) <= half.grid.spacing and abs(half.x_peak[1]) <= half.grid.spacing
    asym = max(np.abs(core - core[::-1, :]).max(), np.abs(core - core.T).max())
    assert asym < 1e-3 * u[i0, i0]


def test_doubled_resolution_agrees(half, half_fine):
    assert half_fine.converged
    assert half.e == pytest.approx(half_fine.e, rel=1e-3)


def test_minimizer_below_test_function(ninety, profile):
    K = build_log_kernel(ninety.grid)
    tau = initial_scale(ninety.rho, profile.mass)
    assert ninety.e < scaling_energy(ninety.rho, tau, profile, ninety.grid, K)


def test_gn_ratio_of_minimizers(half, ninety, profile):
    a = gn_ratio(half.field, profile.mass)
    b = gn_ratio(ninety.field, profile.mass)
    assert a < b <= 1 + 1e-3


def test_supercritical_refused(profile):
    with pytest.raises(SupercriticalMassError):
        minimize(SolveConfig(rho=profile.mass), profile=profile)


def test_underresolved_rejected(profile):
    with pytest.raises(ResolutionError):
        minimize(SolveConfig(rho=0.99 * profile.mass, L=8.0, n=128), profile=profile)


def test_max_iters_flags_partial_result(profile):
    res = minimize(SolveConfig(rho=0.5 * profile.mass, max_iters=3, L=8.0, n=128), profile=profile)
    assert not res.converged
    assert res.flags
    assert res.iters == 3


def test_provided_field(profile, half):
    res = minimize(
        SolveConfig(rho=half.rho, init="provided-field"), profile=profile, init_field=half.field
    )
    assert res.converged
    assert res.e == pytest.approx(half.e, rel=1e-9)


def test_peak_tie_breaking():
    g = make_grid(2.0, 16)
    v = np.zeros((16, 16))
    v[3, 5] = v[2, 9] = v[7, 1] = 1.0
    assert peak_location(g.field(v)) == (2, 9)


def test_fourier_shift_roundtrip(profile):
    g = make_grid(8.0, 128)
    u = embed_Q(profile, g)
    back = fourier_shift(fourier_shift(u, (0.3, -0.2)), (-0.3, 0.2))
    assert np.max(np.abs(back.values - u.values)) < 1e-12


def test_scaling_energy_decreasing_at_critical_mass(profile):
    g = make_grid(8.0, 512)
    K = build_log_kernel(g)
    e = [scaling_energy(profile.mass, t, profile, g, K) for t in (1.0, 2.0, 4.0)]
    assert e[0] > e[1] > e[2]


def test_scaling_energy_bounded_below_when_subcritical(profile):
    g = make_grid(8.0, 512)
    K = build_log_kernel(g)
    e = [scaling_energy(0.5 * profile.mass, t, profile, g, K) for t in (0.5, 1.0, 2.0, 4.0)]
    k = int(np.argmin(e))
    assert 0 < k < len(e) - 1


def test_scaling_energy_rejects_unresolved(profile):
    g = make_grid(8.0, 64)
    with pytest.raises(ResolutionError):
        scaling_energy(profile.mass, 8.0, profile, g, build_log_kernel(g))


def test_scaling_law_bounded_vs_unbounded(profile):
    # E(u_tau) + rho^2/4 ln tau is the quadratic part plus bounded terms
    g = make_grid(8.0, 1024)
    K = build_log_kernel(g)
    taus = (1.0, 2.0, 4.0, 8.0, 16.0)

    def shifted(rho):
        return [scaling_energy(rho, t, profile, g, K) + 0.25 * rho**2 * np.log(t) for t in taus]

    sub = shifted(0.9 * profile.mass)
    sup = shifted(1.1 * profile.mass)
    assert sub[-1] > sub[0]  # grows like +tau^2
    assert all(b < a for a, b in zip(sup, sup[1:]))


def test_test_function_approaches_energy_asymptote(profile):
    g = make_grid(8.0, 1024)
    K = build_log_kernel(g)
    gaps = []
    for f in (0.9, 0.95, 0.99):
        rho = f * profile.mass
        e = scaling_energy(rho, initial_scale(rho, profile.mass), profile, g, K)
        pred = energy_asymptote(rho, profile)
        gaps.append(abs(e - pred) / abs(pred))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.05


def test_uniqueness_single_start(profile):
    rep = uniqueness_probe(0.5 * profile.mass, 1, SolveConfig(rho=1.0, L=8.0, n=256), profile=profile)
    assert rep["pairs"] == []
    assert rep["max_linf_rel"] == 0.0


def test_uniqueness_half_mass(profile):
    rep = uniqueness_probe(0.5 * profile.mass, 5, profile=profile)
    assert all(rep["converged"])
    assert rep["energy_spread_rel"] < 1e-6
    assert rep["max_linf_rel"] < 1e-3
    assert "not a proof" in rep["note"]


def test_uniqueness_rejects_supercritical(profile):
    with pytest.raises(SupercriticalMassError):
        uniqueness_probe(profile.mass, 3, profile=profile)
