import numpy as np
import pytest
from scipy.integrate import trapezoid

from planarsp.exceptions import ShootingError
from planarsp.grid import make_grid
from planarsp.groundstate import (
    OVERSHOOT,
    UNDERSHOOT,
    _classify,
    embed_Q,
    kernel_residual,
    shoot_Q,
)

# Reference values from the same shooting procedure run at dr = 1e-5,
# r_max = 25 (see tests/oracles.py); its ODE residual is below 1e-8.
Q0_REF = 2.2062009
RHO_STAR_REF = 11.7008965


def test_shoot_reproduces_reference(profile):
    assert abs(profile.q0 - Q0_REF) < 1e-4
    assert abs(profile.mass - RHO_STAR_REF) < 1e-3


def test_pohozaev_identities(profile):
    assert abs(profile.kinetic / profile.mass - 1) < 1e-6
    assert abs(profile.quartic / profile.mass - 2) < 1e-6


def test_profile_shape(profile):
    q = profile.values
    assert np.all(q[:-1] > 0)
    assert np.all(np.diff(q) < 0)
    assert q[-1] < 1e-12
    assert profile.r_max >= 20 and profile.dr <= 1e-4


def test_ode_residual_small(profile):
    assert profile.residual() < 1e-6


def test_tail_matches_asymptotic_form(profile):
    r = np.linspace(10, 20, 101)
    s = np.log(profile(r)) + r + 0.5 * np.log(r)
    assert np.ptp(s) < 0.05


def test_classification_monotone():
    dr, nsteps = 1e-3, 20000
    q0s = np.linspace(1.0, 4.0, 61)
    cls = np.array([_classify(q, dr, nsteps) for q in q0s])
    # undershoots first, then overshoots, no interleaving
    flips = np.flatnonzero(np.diff(cls))
    assert len(flips) == 1
    assert cls[0] == UNDERSHOOT and cls[-1] == OVERSHOOT


def test_bad_bracket_raises():
    with pytest.raises(ShootingError):
        shoot_Q(bracket=(2.5, 4.0))


@pytest.mark.parametrize("tol", [0.0, 1e-6])
def test_tol_precondition(tol):
    with pytest.raises(ValueError):
        shoot_Q(tol=tol)


def test_embed_masses(profile):
    g = make_grid(8, 512)
    rs = profile.mass
    assert abs(embed_Q(profile, g).mass / rs - 1) < 1e-6
    assert abs(embed_Q(profile, g, alpha=2.0).mass / (rs / 4) - 1) < 1e-6
    for tau in (1.5, 3.0):
        rho = 0.7 * rs
        u = embed_Q(profile, g, alpha=tau, beta=tau * np.sqrt(rho / rs))
        assert abs(u.mass / rho - 1) < 1e-6


def test_embed_center(profile):
    g = make_grid(8, 256)
    u = embed_Q(profile, g, center=(1.0, -2.0), alpha=2.0)
    i, j = np.unravel_index(np.argmax(u.values), u.values.shape)
    assert g.x1[i] == 1.0 and g.x1[j] == -2.0


def test_kernel_residual(profile):
    g = make_grid(16, 512)
    r1 = kernel_residual(profile, g, "dx1")
    r2 = kernel_residual(profile, g, "dx2")
    rq = kernel_residual(profile, g, "Q")
    assert r1 < 1e-3
    assert abs(r1 - r2) < 1e-10
    # L Q = -2 Q^3, so the continuum value is ||2 Q^3|| / ||Q||
    r = profile.r
    cont = np.sqrt(trapezoid(4 * profile.values**6 * r, r) / trapezoid(profile.values**2 * r, r))
    assert rq > 0.5
    assert abs(rq - cont) < 1e-3 * cont
