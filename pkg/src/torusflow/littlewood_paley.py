"""
Dyadic Littlewood-Paley partitions on the periodic grid.

The family is inhomogeneous: a low block (index ``-1``) followed by annular
blocks ``j = 0 .. j_max``.  Multipliers are telescoped from one smooth
radial cutoff ``chi`` (equal to 1 below ``c1`` and 0 above ``c2/2``)::

    low      chi(|xi|)
    j        chi(|xi| / 2^(j+1)) - chi(|xi| / 2^j)
    top      1 - chi(|xi| / 2^j_max)

so the plain sum is exactly one.  The energy profile divides each of these
by the root of their sum of squares, making the squared sum exactly one.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .fourier_core import (
    GridError,
    PeriodicGrid,
    PhysicalField,
    _check_same_grid,
    forward_transform,
)

__all__ = [
    "DyadicPartition",
    "PartitionMode",
    "PartitionProfile",
    "build_partition",
    "partition_residual",
    "project",
    "project_coeffs",
    "reconstruction_residual",
    "shell_energy",
    "smooth_cutoff",
]

LOW_BLOCK = -1


class PartitionMode(enum.Enum):
    RECONSTRUCTION = "reconstruction"
    ENERGY = "energy"


@dataclass(frozen=True)
class PartitionProfile:
    mode: PartitionMode = PartitionMode.RECONSTRUCTION
    c1: float = 0.5
    c2: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "mode", PartitionMode(self.mode))
        if not (0.0 < self.c1 < 1.0 < self.c2):
            raise ValueError(f"need 0 < c1 < 1 < c2, got c1={self.c1}, c2={self.c2}")
        # chi must fall from 1 at c1 to 0 at c2/2
        if not 2.0 * self.c1 < self.c2:
            raise ValueError(f"need 2*c1 < c2 for nested cutoffs, got c1={self.c1}, c2={self.c2}")


def _exp_glue(t: NDArray) -> NDArray:
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_cutoff(r: NDArray, lo: float, hi: float) -> NDArray:
    """C-infinity radial cutoff: 1 for ``r <= lo``, 0 for ``r >= hi``."""
    t = (np.asarray(r, dtype=float) - lo) / (hi - lo)
    a = _exp_glue(t)
    b = _exp_glue(1.0 - t)
    return b / (a + b)


@dataclass(frozen=True)
class DyadicPartition:
    grid: PeriodicGrid
    profile: PartitionProfile
    j_min: int
    j_max: int
    multipliers: dict[int, NDArray] = field(repr=False)

    @property
    def indices(self) -> range:
        """Valid block indices, low block first."""
        return range(self.j_min - 1, self.j_max + 1)

    @property
    def mode(self) -> PartitionMode:
        return self.profile.mode

    def multiplier(self, j: int) -> NDArray:
        if j not in self.multipliers:
            raise IndexError(
                f"shell {j} out of range; valid shells are "
                f"{self.indices.start}..{self.indices.stop - 1}"
            )
        return self.multipliers[j]

    def annulus(self, j: int) -> tuple[float, float]:
        """Support bounds ``(lower, upper)`` of block ``j``."""
        c1, c2 = self.profile.c1, self.profile.c2
        if j == self.j_min - 1:
            return 0.0, c2 * 2.0**self.j_min
        return c1 * 2.0**j, c2 * 2.0**j


def build_partition(
    grid: PeriodicGrid, profile: PartitionProfile | None = None
) -> DyadicPartition:
    profile = profile or PartitionProfile()
    if grid.n_per_axis < 8:
        raise GridError(
            f"n_per_axis={grid.n_per_axis} is too small to host a dyadic annulus (need >= 8)"
        )
    k_max = grid.k_max
    j_max = math.floor(math.log2(k_max))
    if j_max < 0:
        raise GridError(f"largest resolved |xi|={k_max:.3g} is below the first annulus")
    # for c2 < 2 the last annulus may not reach the Nyquist corner
    while k_max > profile.c2 * 2.0**j_max:
        j_max += 1

    lo, hi = profile.c1, profile.c2 / 2.0
    kmag = grid.k_magnitude

    def chi(scale):
        return smooth_cutoff(kmag / scale, lo, hi)

    raw = {LOW_BLOCK: chi(1.0)}
    for j in range(0, j_max):
        raw[j] = chi(2.0 ** (j + 1)) - chi(2.0**j)
    raw[j_max] = 1.0 - chi(2.0**j_max)

    if profile.mode is PartitionMode.ENERGY:
        norm = np.sqrt(sum(m**2 for m in raw.values()))
        raw = {j: m / norm for j, m in raw.items()}

    for m in raw.values():
        m.flags.writeable = False
    return DyadicPartition(grid, profile, 0, j_max, raw)


def partition_residual(partition: DyadicPartition) -> float:
    """Max over resolved wavevectors of ``|sum_j phi_j^p - 1|``.

    ``p`` is 1 for reconstruction partitions and 2 for energy partitions.
    """
    power = 2 if partition.mode is PartitionMode.ENERGY else 1
    total = sum(m**power for m in partition.multipliers.values())
    return float(np.max(np.abs(total - 1.0)))


def project_coeffs(partition: DyadicPartition, coeffs: NDArray, j: int) -> NDArray:
    """Spectral block ``phi_j * coeffs``; ``coeffs`` may carry leading axes."""
    return partition.multiplier(j) * coeffs


def project(partition: DyadicPartition, f: PhysicalField, j: int) -> PhysicalField:
    _check_same_grid(partition.grid, f.grid)
    F = forward_transform(f).coeffs
    block = project_coeffs(partition, F, j)
    return PhysicalField(f.grid, np.fft.ifftn(block, norm="forward").real)


def reconstruction_residual(partition: DyadicPartition, f: PhysicalField) -> float:
    """``||f - sum_j Delta_j f|| / ||f||``; zero for the zero field."""
    if partition.mode is not PartitionMode.RECONSTRUCTION:
        raise ValueError("reconstruction identity only holds for a reconstruction partition")
    _check_same_grid(partition.grid, f.grid)
    total = np.zeros(f.grid.shape)
    for j in partition.indices:
        total += project(partition, f, j).samples
    denom = float(np.sum(f.samples**2))
    if denom == 0.0:
        return 0.0
    return math.sqrt(float(np.sum((f.samples - total) ** 2)) / denom)


def shell_energy(partition: DyadicPartition, f: PhysicalField, j: int) -> float:
    """``||Delta_j f||^2`` by physical-space quadrature."""
    block = project(partition, f, j)
    return f.grid.cell_volume * float(np.sum(block.samples**2))
