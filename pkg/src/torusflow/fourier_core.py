"""
Periodic-grid Fourier machinery.

Fields live on the torus ``[0, L)^d`` sampled at ``n`` points per axis.
Spectral coefficients use the normalization ``1/n^d`` on the forward
transform and ``1`` on the inverse, so a coefficient array holds the
Fourier-series amplitudes directly: ``cos(x1)`` has ``1/2`` at
``xi = (+-1, 0)``.  With that choice every L2 sum becomes

    ||f||^2 = (L/n)^d sum |f(x)|^2 = L^d sum |F(xi)|^2

and Plancherel holds to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "GridError",
    "HermitianSymmetryError",
    "PeriodicGrid",
    "PhysicalField",
    "SpectralField",
    "extended_plancherel_sobolev_diagnostic",
    "forward_transform",
    "hermitian_defect",
    "inverse_transform",
    "l2_norm",
    "modulus_layout",
    "plancherel_residual",
    "random_field",
    "sobolev_norm",
    "sobolev_weights",
    "spectral_derivative",
]

HERMITIAN_TOL = 1e-10


class GridError(ValueError):
    """Invalid grid parameters, or fields living on different grids."""


class HermitianSymmetryError(ValueError):
    """Spectral data that cannot represent a real field."""


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class PeriodicGrid:
    """Uniform grid on the d-dimensional torus of period ``length``.

    Axis ``k`` of every sample array corresponds to coordinate ``x_{k+1}``
    (``indexing="ij"``), so arrays are row-major with ``x1`` slowest.
    """

    dim: int
    n_per_axis: int
    length: float = 2.0 * math.pi

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise GridError(f"dim must be 2 or 3, got {self.dim}")
        if not _is_power_of_two(int(self.n_per_axis)) or self.n_per_axis < 4:
            raise GridError(
                f"n_per_axis must be a power of two >= 4, got {self.n_per_axis}"
            )
        if not (np.isfinite(self.length) and self.length > 0):
            raise GridError(f"length must be positive, got {self.length}")

    def __eq__(self, other):
        if not isinstance(other, PeriodicGrid):
            return NotImplemented
        return (self.dim, self.n_per_axis, self.length) == (
            other.dim,
            other.n_per_axis,
            other.length,
        )

    def __hash__(self):
        return hash((self.dim, self.n_per_axis, self.length))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_per_axis,) * self.dim

    @property
    def spacing(self) -> float:
        return self.length / self.n_per_axis

    @property
    def cell_volume(self) -> float:
        """Quadrature weight ``(L/n)^d`` of one sample."""
        return self.spacing**self.dim

    @property
    def volume(self) -> float:
        return self.length**self.dim

    @cached_property
    def mode_indices(self) -> tuple[NDArray, ...]:
        """Integer mode numbers per axis in FFT order, broadcastable."""
        m = np.fft.fftfreq(self.n_per_axis, d=1.0 / self.n_per_axis).astype(int)
        out = []
        for axis in range(self.dim):
            shape = [1] * self.dim
            shape[axis] = self.n_per_axis
            out.append(m.reshape(shape))
        return tuple(out)

    @cached_property
    def wavevectors(self) -> tuple[NDArray, ...]:
        """Physical wavevector components ``2 pi m / L``, broadcastable."""
        scale = 2.0 * math.pi / self.length
        return tuple(scale * m for m in self.mode_indices)

    @cached_property
    def k_squared(self) -> NDArray:
        ksq = np.zeros(self.shape)
        for k in self.wavevectors:
            ksq = ksq + k**2
        return ksq

    @cached_property
    def k_magnitude(self) -> NDArray:
        return np.sqrt(self.k_squared)

    @property
    def k_max(self) -> float:
        """Largest resolved ``|xi|`` (the Nyquist corner)."""
        return math.sqrt(self.dim) * (self.n_per_axis // 2) * 2.0 * math.pi / self.length

    @cached_property
    def nyquist_mask(self) -> NDArray:
        """True on every wavevector with a component on the Nyquist plane."""
        mask = np.zeros(self.shape, dtype=bool)
        for m in self.mode_indices:
            mask = mask | (m == -(self.n_per_axis // 2))
        return mask

    def coordinates(self) -> tuple[NDArray, ...]:
        x = np.arange(self.n_per_axis) * self.spacing
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))

    def wavevector_at(self, index: Sequence[int]) -> tuple[float, ...]:
        return tuple(float(np.ravel(k)[i]) for k, i in zip(self.wavevectors, index))


def _check_same_grid(*grids: PeriodicGrid):
    first = grids[0]
    for g in grids[1:]:
        if g != first:
            raise GridError(f"fields live on different grids: {first} vs {g}")


@dataclass(frozen=True)
class PhysicalField:
    """One real scalar component sampled on the grid."""

    grid: PeriodicGrid
    samples: NDArray = field(repr=False)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.size == self.grid.n_per_axis**self.grid.dim:
            samples = samples.reshape(self.grid.shape)
        if samples.shape != self.grid.shape:
            raise GridError(
                f"samples have shape {samples.shape}, grid expects {self.grid.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise ValueError("field samples must be finite")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    def __add__(self, other: PhysicalField) -> PhysicalField:
        _check_same_grid(self.grid, other.grid)
        return PhysicalField(self.grid, self.samples + other.samples)

    def __sub__(self, other: PhysicalField) -> PhysicalField:
        _check_same_grid(self.grid, other.grid)
        return PhysicalField(self.grid, self.samples - other.samples)

    def __mul__(self, scalar: float) -> PhysicalField:
        return PhysicalField(self.grid, scalar * self.samples)

    __rmul__ = __mul__

    @classmethod
    def zeros(cls, grid: PeriodicGrid) -> PhysicalField:
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_function(cls, grid: PeriodicGrid, fn) -> PhysicalField:
        """Sample ``fn(x1, ..., xd)`` on the grid."""
        return cls(grid, fn(*grid.coordinates()))


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients of one component, in FFT index order."""

    grid: PeriodicGrid
    coeffs: NDArray = field(repr=False)

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex)
        if coeffs.shape != self.grid.shape:
            raise GridError(
                f"coeffs have shape {coeffs.shape}, grid expects {self.grid.shape}"
            )
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    def __add__(self, other: SpectralField) -> SpectralField:
        _check_same_grid(self.grid, other.grid)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __mul__(self, scalar: complex) -> SpectralField:
        return SpectralField(self.grid, scalar * self.coeffs)

    __rmul__ = __mul__

    def coefficient(self, mode: Sequence[int]) -> complex:
        """Coefficient at integer mode ``mode`` (negative indices allowed)."""
        n = self.grid.n_per_axis
        return complex(self.coeffs[tuple(int(m) % n for m in mode)])


def reflected(coeffs: NDArray) -> NDArray:
    """Array ``G`` with ``G[xi] = coeffs[-xi]`` (indices taken mod n)."""
    axes = tuple(range(coeffs.ndim))
    return np.roll(np.flip(coeffs, axis=axes), 1, axis=axes)


def hermitian_defect(coeffs: NDArray) -> tuple[float, tuple[int, ...]]:
    """Largest ``|F(-xi) - conj F(xi)|`` and the index where it occurs."""
    defect = np.abs(reflected(coeffs) - np.conj(coeffs))
    idx = np.unravel_index(int(np.argmax(defect)), defect.shape)
    return float(defect[idx]), tuple(int(i) for i in idx)


def forward_transform(f: PhysicalField) -> SpectralField:
    return SpectralField(f.grid, np.fft.fftn(f.samples, norm="forward"))


def inverse_transform(F: SpectralField) -> PhysicalField:
    """Real field with Fourier coefficients ``F``.

    Raises
    ------
    HermitianSymmetryError
        If ``F`` is not Hermitian to within ``1e-10`` (scaled by the largest
        coefficient when that exceeds one).
    """
    worst, idx = hermitian_defect(F.coeffs)
    scale = max(1.0, float(np.max(np.abs(F.coeffs), initial=0.0)))
    if worst > HERMITIAN_TOL * scale:
        n = F.grid.n_per_axis
        mode = tuple(i - n if i >= n // 2 else i for i in idx)
        raise HermitianSymmetryError(
            f"coefficients are not Hermitian: defect {worst:.3e} at mode {mode} "
            f"(wavevector {F.grid.wavevector_at(idx)})"
        )
    return PhysicalField(F.grid, np.fft.ifftn(F.coeffs, norm="forward").real)


def spectral_derivative(F: SpectralField, alpha: Sequence[int]) -> SpectralField:
    """Apply the multiplier ``prod_k (i xi_k)^alpha_k``.

    Odd-order derivatives along an axis zero that axis' Nyquist plane, which
    has no Hermitian partner and would otherwise produce an imaginary part.
    """
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != F.grid.dim:
        raise ValueError(f"multi-index {alpha} does not match dim {F.grid.dim}")
    if any(a < 0 for a in alpha):
        raise ValueError(f"multi-index components must be nonnegative, got {alpha}")
    mult = np.ones(F.grid.shape, dtype=complex)
    nyq = -(F.grid.n_per_axis // 2)
    for a, k, m in zip(alpha, F.grid.wavevectors, F.grid.mode_indices):
        if a == 0:
            continue
        factor = (1j * k) ** a
        if a % 2 == 1:
            factor = np.where(m == nyq, 0.0, factor)
        mult = mult * factor
    return SpectralField(F.grid, F.coeffs * mult)


def l2_norm(f: PhysicalField) -> float:
    return math.sqrt(f.grid.cell_volume * float(np.sum(f.samples**2)))


def plancherel_residual(f: PhysicalField) -> float:
    """Relative mismatch between physical and spectral L2 energies."""
    phys = f.grid.cell_volume * float(np.sum(f.samples**2))
    F = forward_transform(f)
    spec = f.grid.volume * float(np.sum(np.abs(F.coeffs) ** 2))
    return abs(phys - spec) / max(phys, 1e-300)


def sobolev_weights(grid: PeriodicGrid, s: float) -> NDArray:
    """``(1 + |xi|^2)^s`` evaluated as ``exp(s log1p(|xi|^2))``."""
    if not math.isfinite(s):
        raise ValueError(f"Sobolev order must be finite, got {s}")
    return np.exp(s * np.log1p(grid.k_squared))


def _sobolev_from_coeffs(grid: PeriodicGrid, coeffs: NDArray, s: float) -> float:
    w = sobolev_weights(grid, s)
    return math.sqrt(grid.volume * float(np.sum(w * np.abs(coeffs) ** 2)))


def sobolev_norm(f: PhysicalField, s: float) -> float:
    """``H^s`` norm ``(L^d sum (1+|xi|^2)^s |F(xi)|^2)^(1/2)``."""
    return _sobolev_from_coeffs(f.grid, forward_transform(f).coeffs, s)


def modulus_layout(f: PhysicalField) -> PhysicalField:
    """Physical field whose samples are the coefficient moduli of ``f``.

    Moduli are laid out centred (zero frequency in the middle of the grid)
    and scaled by ``n^(d/2)`` so the result has the same L2 norm as ``f``.
    """
    F = forward_transform(f)
    scale = f.grid.n_per_axis ** (f.grid.dim / 2.0)
    return PhysicalField(f.grid, scale * np.fft.fftshift(np.abs(F.coeffs)))


def extended_plancherel_sobolev_diagnostic(
    f: PhysicalField, s: float
) -> tuple[float, float]:
    """``(||f||_{H^s}, ||modulus_layout(f)||_{H^s})``.

    The two agree at ``s = 0``; for other orders they are reported, not
    compared.
    """
    return sobolev_norm(f, s), sobolev_norm(modulus_layout(f), s)


def random_field(
    grid: PeriodicGrid,
    rng: np.random.Generator,
    band_limited: bool = True,
    amplitude: float = 1.0,
) -> PhysicalField:
    """White-noise test field.

    With ``band_limited`` the Nyquist planes are removed, so every odd
    derivative is exact and the field is a trigonometric polynomial of
    degree below ``n/2`` per axis.
    """
    samples = amplitude * rng.standard_normal(grid.shape)
    if not band_limited:
        return PhysicalField(grid, samples)
    F = np.fft.fftn(samples, norm="forward")
    F[grid.nyquist_mask] = 0.0
    return PhysicalField(grid, np.fft.ifftn(F, norm="forward").real)
