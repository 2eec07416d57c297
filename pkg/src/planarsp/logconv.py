"""Free-space convolutions with logarithmic and Coulomb-type kernels.

All convolutions are evaluated on the doubled grid (zero padding to ``2n``
per axis), which turns the FFT product into the exact linear convolution
``h^2 sum_y K(x - y) f(y)`` of the sampled data.  The kernel value in the
singular origin cell is the average of the kernel over the disc of equal
area, radius ``a = h / sqrt(pi)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft
from scipy.integrate import quad

from .exceptions import KernelMismatchError
from .grid import Field2D, Grid2D, integrate

__all__ = [
    "KernelTable",
    "build_log_kernel",
    "disc_average",
    "log_potential",
    "convolve",
    "v_functionals",
    "singular_integral_D",
    "momentum_identity_check",
    "direct_convolution",
]


def _log_kernel(s):
    return np.log(s)


def _log1p_sq(s):
    return np.log1p(s * s)


def _log1p_inv_sq(s):
    return np.log1p(1.0 / (s * s))


def _inverse(s):
    return 1.0 / s


_KERNELS = {
    "log": _log_kernel,
    "log1p_sq": _log1p_sq,
    "log1p_inv_sq": _log1p_inv_sq,
    "inverse": _inverse,
}


def disc_average(kind: str, a: float) -> float:
    """Mean of the radial kernel over the disc of radius ``a``."""
    if kind == "log":
        return float(np.log(a) - 0.5)
    if kind == "inverse":
        return 2.0 / a
    if kind == "log1p_sq":
        t = a * a
        return float(((1 + t) * np.log1p(t) - t) / t)
    if kind == "log1p_inv_sq":
        # integrable log singularity at 0; quad handles it with the breakpoint hint
        val, _ = quad(lambda r: r * np.log1p(1.0 / (r * r)), 0.0, a, limit=200, epsabs=0, epsrel=1e-13)
        return float(2.0 * val / (a * a))
    raise KeyError(kind)


def _padded_offsets(g: Grid2D) -> np.ndarray:
    m = np.fft.fftfreq(2 * g.n, d=1.0 / (2 * g.n))
    return g.spacing * m


@dataclass(frozen=True, eq=False)
class KernelTable:
    """Kernels sampled at the doubled-grid offsets ``m h``, ``-n <= m < n``, in FFT order."""

    grid: Grid2D
    _spectra: dict = field(default_factory=dict, repr=False)

    @property
    def disc_radius(self) -> float:
        return self.grid.spacing / np.sqrt(np.pi)

    @cached_property
    def _offset_radius(self) -> np.ndarray:
        d = _padded_offsets(self.grid)
        return np.hypot(d[:, None], d[None, :])

    def samples(self, kind: str = "log") -> np.ndarray:
        s = self._offset_radius
        with np.errstate(divide="ignore"):
            k = _KERNELS[kind](np.where(s > 0, s, 1.0))
        k[0, 0] = disc_average(kind, self.disc_radius)
        return k

    @property
    def log_samples(self) -> np.ndarray:
        return self.samples("log")

    def spectrum(self, kind: str = "log") -> np.ndarray:
        if kind not in self._spectra:
            self._spectra[kind] = sfft.rfft2(self.samples(kind))
        return self._spectra[kind]

    def vector_spectra(self) -> tuple[np.ndarray, np.ndarray]:
        """Spectra of the components of ``z / |z|^2`` (zero at the origin)."""
        if "vec" not in self._spectra:
            d = _padded_offsets(self.grid)
            zx, zy = np.meshgrid(d, d, indexing="ij")
            s2 = zx * zx + zy * zy
            s2[0, 0] = 1.0
            kx, ky = zx / s2, zy / s2
            kx[0, 0] = ky[0, 0] = 0.0
            self._spectra["vec"] = (sfft.rfft2(kx), sfft.rfft2(ky))
        return self._spectra["vec"]


def build_log_kernel(g: Grid2D) -> KernelTable:
    """Kernel table for ``g``; spectra are built lazily and cached per kernel."""
    K = KernelTable(g)
    K.spectrum("log")
    return K


def _convolve_spectrum(g: Grid2D, values: np.ndarray, spec: np.ndarray) -> np.ndarray:
    n = g.n
    fh = sfft.rfft2(values, s=(2 * n, 2 * n))
    out = sfft.irfft2(fh * spec, s=(2 * n, 2 * n))
    return g.cell_area * out[:n, :n]


def convolve(f: Field2D, K: KernelTable, kind: str = "log") -> Field2D:
    """``(K_kind * f)(x) = h^2 sum_y K(x - y) f(y)``."""
    if not f.grid.same_as(K.grid):
        raise KernelMismatchError("field grid does not match kernel grid")
    return Field2D(f.grid, _convolve_spectrum(f.grid, f.values, K.spectrum(kind)))


def log_potential(density: Field2D, K: KernelTable) -> Field2D:
    """``Phi(x) = int ln|x - y| density(y) dy`` on the grid."""
    return convolve(density, K, "log")


def _density(u: Field2D) -> Field2D:
    return Field2D(u.grid, u.values**2)


def v_functionals(u: Field2D, K: KernelTable) -> tuple[float, float, float]:
    """``(V0, V1, V2)`` with kernels ``ln s``, ``ln(1+s^2)``, ``ln(1+1/s^2)``."""
    rho = _density(u)
    out = []
    for kind in ("log", "log1p_sq", "log1p_inv_sq"):
        out.append(integrate(rho * convolve(rho, K, kind)))
    return tuple(out)


def singular_integral_D(u: Field2D, K: KernelTable | None = None) -> float:
    """``iint u^2(x) u^2(y) / |x - y|``."""
    if K is None:
        K = KernelTable(u.grid)
    rho = _density(u)
    return integrate(rho * convolve(rho, K, "inverse"))


def momentum_identity_check(u: Field2D, K: KernelTable | None = None) -> float:
    """Return ``S - rho^2 / 2`` where ``S = iint (x-y).x / |x-y|^2 u^2(x) u^2(y)``.

    The diagonal pairs carry the symmetrized kernel value 1/2.
    """
    g = u.grid
    if K is None:
        K = KernelTable(g)
    rho = u.values**2
    sx, sy = K.vector_spectra()
    Gx = _convolve_spectrum(g, rho, sx)
    Gy = _convolve_spectrum(g, rho, sy)
    X, Y = g.coords
    h2 = g.cell_area
    S = h2 * np.sum(rho * (X * Gx + Y * Gy)) + 0.5 * h2 * h2 * np.sum(rho * rho)
    return float(S - 0.5 * u.mass**2)


def direct_convolution(f: Field2D, kind: str = "log") -> Field2D:
    """O(n^4) reference summation, for small grids only."""
    g = f.grid
    X, Y = g.coords
    xs, ys, fs = X.ravel(), Y.ravel(), f.values.ravel()
    a = g.spacing / np.sqrt(np.pi)
    origin = disc_average(kind, a)
    kern = _KERNELS[kind]
    out = np.empty_like(fs)
    for i in range(fs.size):
        s = np.hypot(xs[i] - xs, ys[i] - ys)
        with np.errstate(divide="ignore"):
            kv = kern(np.where(s > 0, s, 1.0))
        kv[i] = origin
        out[i] = g.cell_area * np.dot(kv, fs)
    return Field2D(g, out.reshape(g.n, g.n))
