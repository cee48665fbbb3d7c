"""Periodic discretization of the complex torus C^n/(Z^n + i Z^n).

Conventions
-----------
* Real coordinates are ordered ``(x^1, ..., x^n, y^1, ..., y^n)`` on
  ``[0, 1)^{2n}`` with ``z^j = x^j + i y^j``; grid axis ``a`` holds ``x^{a+1}``
  for ``a < n`` and ``y^{a-n+1}`` otherwise.
* Samples live on the uniform lattice with spacing exactly ``1/N``.
* Differentiation is spectral: fields are expanded in the discrete Fourier
  basis ``exp(2*pi*i*k.x)`` with integer wave vectors ``k``; the derivative of
  the unpaired Nyquist mode (``k = -N/2``) is set to zero so real fields stay
  real.
* ``integrate`` is the plain Lebesgue integral over the unit cell, i.e. the
  sample mean, which is exact for trigonometric polynomials resolvable on the
  grid.

Arrays indexed over the grid carry the ``2n`` grid axes first; any tensor
component axes come after them, so pointwise linear algebra can use numpy's
batched ``linalg`` routines directly.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

__all__ = [
    "TorusGrid",
    "ScalarField",
    "make_grid",
    "wirtinger_d",
    "wirtinger_dbar",
    "integrate",
    "random_real_trig",
]

#: Hard cap on grid points (N^{2n}); keeps a single complex field well under 1 GB.
DEFAULT_MAX_POINTS = 2**25

_FFT_WORKERS = min(2, os.cpu_count() or 1)


def _fftn(values: np.ndarray, axes) -> np.ndarray:
    return scipy.fft.fftn(values, axes=axes, workers=_FFT_WORKERS)


def _ifftn(values: np.ndarray, axes) -> np.ndarray:
    return scipy.fft.ifftn(values, axes=axes, workers=_FFT_WORKERS)


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid on the real torus underlying C^n/(Z^n + i Z^n).

    Attributes
    ----------
    n : complex dimension (1 <= n <= 3).
    N : samples per real axis (even, >= 8); spacing is 1/N.
    """

    n: int
    N: int

    @property
    def dim_real(self) -> int:
        return 2 * self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.dim_real

    @property
    def num_points(self) -> int:
        return self.N ** self.dim_real

    @property
    def spacing(self) -> float:
        return 1.0 / self.N

    def axis_of_x(self, i: int) -> int:
        """Grid axis of the real coordinate x^{i+1} (0-based i)."""
        return i

    def axis_of_y(self, i: int) -> int:
        """Grid axis of the real coordinate y^{i+1} (0-based i)."""
        return self.n + i

    def coordinate(self, axis: int) -> np.ndarray:
        """Samples of one real coordinate, broadcast to a grid-shaped view."""
        if not 0 <= axis < self.dim_real:
            raise ValueError(f"axis {axis} out of range for 2n={self.dim_real}")
        c = np.arange(self.N) / self.N
        shape = [1] * self.dim_real
        shape[axis] = self.N
        return c.reshape(shape)

    def wavenumbers(self, axis: int) -> np.ndarray:
        """Integer wave vector component along ``axis``, fft layout."""
        k = np.fft.fftfreq(self.N, d=1.0 / self.N)
        shape = [1] * self.dim_real
        shape[axis] = self.N
        return k.reshape(shape)

    def deriv_symbol(self, axis: int) -> np.ndarray:
        """Fourier multiplier of d/dx_axis with the Nyquist mode zeroed."""
        k = np.fft.fftfreq(self.N, d=1.0 / self.N)
        k[self.N // 2] = 0.0
        shape = [1] * self.dim_real
        shape[axis] = self.N
        return (2j * np.pi * k).reshape(shape)

    def wirtinger_symbol(self, i: int, conjugate: bool = False) -> np.ndarray:
        """Fourier multiplier of d/dz^i (or d/dzbar^i)."""
        if not 0 <= i < self.n:
            raise ValueError(f"complex axis {i} out of range for n={self.n}")
        sx = self.deriv_symbol(self.axis_of_x(i))
        sy = self.deriv_symbol(self.axis_of_y(i))
        sign = 1j if conjugate else -1j
        return 0.5 * (sx + sign * sy)

    # -- spectral transforms ------------------------------------------------

    def spectrum(self, values: np.ndarray) -> np.ndarray:
        """Forward DFT over the grid axes (component axes untouched)."""
        return _fftn(np.asarray(values, dtype=np.complex128), axes=self._grid_axes(values))

    def from_spectrum(self, spec: np.ndarray) -> np.ndarray:
        return _ifftn(spec, axes=self._grid_axes(spec))

    def _grid_axes(self, values: np.ndarray) -> tuple[int, ...]:
        if values.ndim < self.dim_real or values.shape[: self.dim_real] != self.shape:
            raise ValueError(
                f"array of shape {values.shape} does not start with grid shape {self.shape}"
            )
        return tuple(range(self.dim_real))

    def _mul_symbol(self, spec: np.ndarray, symbol: np.ndarray) -> np.ndarray:
        extra = spec.ndim - self.dim_real
        return spec * symbol.reshape(symbol.shape + (1,) * extra)

    def axis_deriv(self, values: np.ndarray, axis: int, spec: np.ndarray | None = None) -> np.ndarray:
        """Spectral d/dx_axis of a grid array (exact on resolvable modes)."""
        if spec is None:
            spec = self.spectrum(values)
        return self.from_spectrum(self._mul_symbol(spec, self.deriv_symbol(axis)))

    def dz(self, values: np.ndarray, i: int, spec: np.ndarray | None = None) -> np.ndarray:
        """Wirtinger derivative d/dz^i = (d/dx^i - i d/dy^i)/2."""
        if spec is None:
            spec = self.spectrum(values)
        return self.from_spectrum(self._mul_symbol(spec, self.wirtinger_symbol(i)))

    def dzbar(self, values: np.ndarray, i: int, spec: np.ndarray | None = None) -> np.ndarray:
        """Conjugate Wirtinger derivative d/dzbar^i = (d/dx^i + i d/dy^i)/2."""
        if spec is None:
            spec = self.spectrum(values)
        return self.from_spectrum(self._mul_symbol(spec, self.wirtinger_symbol(i, conjugate=True)))

    def dz_dzbar(self, values: np.ndarray, i: int, j: int, spec: np.ndarray | None = None) -> np.ndarray:
        """Mixed second derivative d^2/(dz^i dzbar^j)."""
        if spec is None:
            spec = self.spectrum(values)
        sym = self.wirtinger_symbol(i) * self.wirtinger_symbol(j, conjugate=True)
        return self.from_spectrum(self._mul_symbol(spec, sym))

    def mean(self, values: np.ndarray) -> complex | np.ndarray:
        """Sample mean over the grid axes = integral over [0,1)^{2n}."""
        return np.mean(values, axis=self._grid_axes(values))

    def exp_mode(self, wave) -> np.ndarray:
        """The plane wave exp(2*pi*i * wave.x) as a grid array."""
        wave = np.asarray(wave, dtype=int)
        if wave.shape != (self.dim_real,):
            raise ValueError(f"wave vector must have {self.dim_real} components")
        phase = sum(wave[a] * self.coordinate(a) for a in range(self.dim_real))
        return np.exp(2j * np.pi * phase)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Complex- or real-valued function sampled on a :class:`TorusGrid`.

    ``real=True`` asserts that the imaginary part is numerical noise
    (checked against ``REAL_TOL`` relative to the field scale).
    """

    grid: TorusGrid
    values: np.ndarray
    real: bool = field(default=False)

    REAL_TOL = 1e-10

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            raise ValueError(f"values of shape {v.shape} do not match grid {self.grid.shape}")
        object.__setattr__(self, "values", v)
        if self.real:
            self.real_values()  # validates

    def real_values(self) -> np.ndarray:
        """Real part, after checking the imaginary part is below tolerance."""
        scale = max(np.max(np.abs(self.values)), 1e-300)
        worst = np.max(np.abs(self.values.imag))
        if worst > self.REAL_TOL * max(scale, 1.0):
            raise ValueError(
                f"field tagged real has imaginary part {worst:.3e} (scale {scale:.3e})"
            )
        return self.values.real.copy()

    # Small arithmetic surface; anything fancier should go through .values.
    def _wrap(self, values, real):
        return ScalarField(self.grid, values, real=real)

    def __add__(self, other):
        if isinstance(other, ScalarField):
            return self._wrap(self.values + other.values, self.real and other.real)
        return self._wrap(self.values + other, self.real and np.isrealobj(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, ScalarField):
            return self._wrap(self.values - other.values, self.real and other.real)
        return self._wrap(self.values - other, self.real and np.isrealobj(other))

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            return self._wrap(self.values * other.values, self.real and other.real)
        return self._wrap(self.values * other, self.real and np.isrealobj(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.values, self.real)

    def conj(self):
        return self._wrap(np.conj(self.values), self.real)


def make_grid(n: int, N: int, max_points: int = DEFAULT_MAX_POINTS) -> TorusGrid:
    """Build a torus grid with ``N`` samples per real axis.

    Parameters
    ----------
    n : complex dimension, 1 <= n <= 3.
    N : even number of samples per axis, N >= 8.
    max_points : memory budget on the total point count N^{2n}.
    """
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= 3:
        raise ValueError(f"complex dimension n={n} outside supported range [1, 3]")
    if not isinstance(N, (int, np.integer)) or N < 8:
        raise ValueError(f"N={N} must be an integer >= 8")
    if N % 2 != 0:
        raise ValueError(f"N={N} must be even (paired Fourier modes)")
    if N ** (2 * n) > max_points:
        raise ValueError(
            f"grid with N^(2n) = {N ** (2 * n)} points exceeds budget {max_points}"
        )
    return TorusGrid(int(n), int(N))


def wirtinger_d(f: ScalarField, i: int) -> ScalarField:
    """Wirtinger derivative d/dz^i of a sampled field (spectral)."""
    return ScalarField(f.grid, f.grid.dz(f.values, i))


def wirtinger_dbar(f: ScalarField, i: int) -> ScalarField:
    """Conjugate Wirtinger derivative d/dzbar^i of a sampled field."""
    return ScalarField(f.grid, f.grid.dzbar(f.values, i))


def integrate(f: ScalarField | np.ndarray, grid: TorusGrid | None = None) -> complex:
    """Integral of a scalar field over [0,1)^{2n} (the sample mean)."""
    if isinstance(f, ScalarField):
        return complex(np.mean(f.values))
    if grid is None:
        raise ValueError("grid required when integrating a bare array")
    return complex(grid.mean(np.asarray(f)))


def random_real_trig(
    grid: TorusGrid,
    rng: np.random.Generator,
    max_wave: int = 2,
    terms: int = 6,
    amplitude: float = 0.1,
) -> ScalarField:
    """Random real trigonometric polynomial, resolvable on the grid.

    Draws ``terms`` wave vectors with sup-norm <= ``max_wave`` and adds each
    mode together with its conjugate, so the result is exactly real and its
    spectrum is symmetric.
    """
    values = np.zeros(grid.shape, dtype=np.complex128)
    for _ in range(terms):
        while True:
            wave = rng.integers(-max_wave, max_wave + 1, size=grid.dim_real)
            if np.any(wave != 0):
                break
        coeff = (rng.normal() + 1j * rng.normal()) * amplitude / (2 * terms)
        mode = grid.exp_mode(wave)
        values += coeff * mode + np.conj(coeff * mode)
    return ScalarField(grid, values, real=True)
