import numpy as np
import pytest

from planarsp.exceptions import InvalidGridError
from planarsp.grid import (
    Field2D,
    grad_norm_sq,
    integrate,
    laplacian,
    make_grid,
    parseval_sum,
)

from .conftest import smooth_random_field


def test_make_grid_spacing_and_nyquist():
    g = make_grid(8, 16)
    assert g.spacing == 1.0
    assert 0.0 in g.wavenumbers
    assert np.isclose(np.abs(g.wavenumbers).max(), np.pi)
    assert make_grid(8, 512).spacing == 0.03125
    assert g.spacing * g.n == 2 * g.half_width


@pytest.mark.parametrize("L, n", [(8, 100), (8, 8), (0, 64), (-1, 64)])
def test_invalid_grids(L, n):
    with pytest.raises(InvalidGridError):
        make_grid(L, n)


def test_wavenumbers_dft_order():
    g = make_grid(3, 32)
    k = g.wavenumbers
    assert np.allclose(k, 2 * np.pi * np.fft.fftfreq(32, g.spacing))
    assert np.isclose(-k[16], np.pi / g.spacing)


def test_integrate_constant_and_gaussian():
    g = make_grid(1, 16)
    assert np.isclose(integrate(g.field(np.ones((16, 16)))), 4.0)
    assert integrate(g.zeros()) == 0.0
    g = make_grid(8, 256)
    assert abs(integrate(g.field(np.exp(-g.radius**2))) - np.pi) < 1e-10


def test_field_mass_and_finiteness():
    g = make_grid(2, 16)
    v = np.arange(256.0).reshape(16, 16) / 100
    f = Field2D(g, v)
    assert abs(f.mass - g.cell_area * np.sum(v * v)) <= 1e-12 * f.mass
    with pytest.raises(ValueError):
        Field2D(g, np.full((16, 16), np.nan))
    assert not f.values.flags.writeable


def test_laplacian_eigenfunction_and_constant():
    L = 4.0
    g = make_grid(L, 64)
    X, _ = g.coords
    f = g.field(np.sin(np.pi * X / L))
    lap = laplacian(f)
    assert np.abs(lap.values + (np.pi / L) ** 2 * f.values).max() < 1e-10
    assert np.abs(laplacian(g.field(np.full((64, 64), 3.0))).values).max() < 1e-12


def test_laplacian_of_gaussian():
    g = make_grid(8, 256)
    r2 = g.radius**2
    lap = laplacian(g.field(np.exp(-r2)))
    assert np.abs(lap.values - 4 * (r2 - 1) * np.exp(-r2)).max() < 1e-8


def test_grad_norm_single_mode():
    L = 2.0
    g = make_grid(L, 32)
    assert grad_norm_sq(g.zeros()) == 0.0
    X, _ = g.coords
    f = g.field(np.sin(np.pi * X / L))
    assert np.isclose(grad_norm_sq(f), (np.pi / L) ** 2 * f.mass, rtol=1e-12)


def test_grad_norm_of_Q_equals_mass(profile):
    from planarsp.groundstate import embed_Q

    g = make_grid(8, 512)
    Q = embed_Q(profile, g)
    assert abs(grad_norm_sq(Q) / integrate(Q * Q) - 1) < 5e-3


def test_parseval_consistency(rng):
    g = make_grid(3, 64)
    f = smooth_random_field(g, rng)
    lhs = integrate(f * f)
    rhs = parseval_sum(g, g.rfft(f.values))
    assert abs(lhs - rhs) <= 1e-12 * lhs


def test_laplacian_linear(rng):
    g = make_grid(3, 64)
    f, h = smooth_random_field(g, rng), smooth_random_field(g, rng)
    a, b = 0.7, -1.3
    lhs = laplacian(a * f + b * h).values
    rhs = a * laplacian(f).values + b * laplacian(h).values
    assert np.abs(lhs - rhs).max() <= 1e-12 * np.abs(lhs).max()


def test_grad_norm_matches_integration_by_parts(rng):
    g = make_grid(4, 64)
    f = smooth_random_field(g, rng)
    gn = grad_norm_sq(f)
    assert gn >= 0
    assert abs(gn + integrate(f * laplacian(f))) <= 1e-10 * gn
