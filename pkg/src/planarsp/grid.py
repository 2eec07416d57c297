"""Uniform periodic grids on [-L, L)^2 with rectangle-rule quadrature and
spectral differentiation."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .exceptions import InvalidGridError, KernelMismatchError, TruncationWarning

__all__ = [
    "Grid2D",
    "Field2D",
    "make_grid",
    "integrate",
    "laplacian",
    "grad_norm_sq",
    "gradient",
    "boundary_ratio",
]


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Square grid with ``n`` points per side covering ``[-L, L)``.

    Arrays on the grid are indexed ``[i, j]`` with ``x = x1[i]``, ``y = x1[j]``.
    """

    half_width: float
    n: int

    def __post_init__(self):
        n, L = self.n, self.half_width
        if not isinstance(n, (int, np.integer)) or n < 16 or n & (n - 1):
            raise InvalidGridError(f"n must be a power of two >= 16, got {n!r}")
        if not np.isfinite(L) or L <= 0:
            raise InvalidGridError(f"half width must be positive, got {L!r}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def cell_area(self) -> float:
        return self.spacing**2

    @cached_property
    def x1(self) -> np.ndarray:
        """Node coordinates along one axis."""
        return -self.half_width + self.spacing * np.arange(self.n)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers in DFT order; the Nyquist entry is ``-pi/h``."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        X, Y = np.meshgrid(self.x1, self.x1, indexing="ij")
        return X, Y

    @cached_property
    def radius(self) -> np.ndarray:
        X, Y = self.coords
        return np.hypot(X, Y)

    @cached_property
    def k_squared(self) -> np.ndarray:
        """|k|^2 on the half-spectrum layout used by ``rfft2``."""
        kx = self.wavenumbers
        ky = kx[: self.n // 2 + 1].copy()
        ky[-1] = abs(ky[-1])
        return kx[:, None] ** 2 + ky[None, :] ** 2

    def rfft(self, values: np.ndarray) -> np.ndarray:
        return sfft.rfft2(values)

    def irfft(self, coeffs: np.ndarray) -> np.ndarray:
        return sfft.irfft2(coeffs, s=(self.n, self.n))

    def same_as(self, other: "Grid2D") -> bool:
        return self is other or (self.n == other.n and self.half_width == other.half_width)

    def field(self, values) -> "Field2D":
        return Field2D(self, np.asarray(values, dtype=float))

    def zeros(self) -> "Field2D":
        return Field2D(self, np.zeros((self.n, self.n)))


@dataclass(frozen=True, eq=False)
class Field2D:
    """Real samples ``u(x_i, y_j)`` on a grid, with the stored mass ``int u^2``."""

    grid: Grid2D
    values: np.ndarray
    mass: float = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"expected shape {(self.grid.n,) * 2}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "mass", float(self.grid.cell_area * np.sum(v * v)))

    def with_values(self, values) -> "Field2D":
        return Field2D(self.grid, values)

    def scaled_to_mass(self, rho: float) -> "Field2D":
        if self.mass <= 0:
            raise ValueError("cannot rescale a zero field")
        return Field2D(self.grid, self.values * np.sqrt(rho / self.mass))

    def __add__(self, other):
        _check_same(self, other)
        return Field2D(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same(self, other)
        return Field2D(self.grid, self.values - other.values)

    def __mul__(self, a):
        if isinstance(a, Field2D):
            _check_same(self, a)
            return Field2D(self.grid, self.values * a.values)
        return Field2D(self.grid, self.values * float(a))

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def _check_same(a: Field2D, b: Field2D) -> None:
    if not a.grid.same_as(b.grid):
        raise KernelMismatchError("fields live on different grids")


def make_grid(L: float, n: int) -> Grid2D:
    """Build the grid on ``[-L, L)^2`` with ``n`` (power of two, >= 16) points per side."""
    return Grid2D(float(L), n)


def integrate(f: Field2D) -> float:
    """Rectangle rule, ``h^2 * sum(f)``."""
    return float(f.grid.cell_area * np.sum(f.values))


def laplacian(f: Field2D) -> Field2D:
    g = f.grid
    return Field2D(g, g.irfft(-g.k_squared * g.rfft(f.values)))


def gradient(f: Field2D) -> tuple[Field2D, Field2D]:
    """Spectral partial derivatives, with the Nyquist mode dropped so the result is real."""
    g = f.grid
    fh = sfft.fft2(f.values)
    k = g.wavenumbers.copy()
    k[g.n // 2] = 0.0
    dx = sfft.ifft2(1j * k[:, None] * fh).real
    dy = sfft.ifft2(1j * k[None, :] * fh).real
    return Field2D(g, dx), Field2D(g, dy)


def _half_spectrum_weights(n: int) -> np.ndarray:
    # columns 0 and n/2 appear once in the full spectrum, the rest twice
    w = np.full(n // 2 + 1, 2.0)
    w[0] = w[-1] = 1.0
    return w


def parseval_sum(g: Grid2D, coeffs: np.ndarray, weight: np.ndarray | None = None) -> float:
    """``h^2 / n^2 * sum_k weight(k) |c_k|^2`` over the full spectrum, from rfft2 output."""
    p = np.abs(coeffs) ** 2
    if weight is not None:
        p = p * weight
    w = _half_spectrum_weights(g.n)
    return float(g.cell_area * np.sum(p * w[None, :]) / g.n**2)


def grad_norm_sq(f: Field2D) -> float:
    """``int |grad f|^2`` by Parseval."""
    g = f.grid
    return parseval_sum(g, g.rfft(f.values), g.k_squared)


def boundary_ratio(f: Field2D, width: int = 1) -> float:
    """Largest ``|u|`` on the outer ``width`` rows/columns relative to ``max |u|``."""
    v = np.abs(f.values)
    peak = v.max()
    if peak == 0:
        return 0.0
    edge = max(
        v[:width].max(), v[-width:].max(), v[:, :width].max(), v[:, -width:].max()
    )
    return float(edge / peak)


def check_decay(f: Field2D, threshold: float = 1e-10) -> bool:
    """Warn when the field has not decayed below ``threshold * max|u|`` at the box edge."""
    r = boundary_ratio(f)
    if r > threshold:
        warnings.warn(
            f"boundary value {r:.2e} x max|u| exceeds {threshold:.0e}; "
            "periodic truncation may be visible",
            TruncationWarning,
            stacklevel=2,
        )
        return False
    return True
