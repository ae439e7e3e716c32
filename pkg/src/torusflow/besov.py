"""Besov norms built from Littlewood-Paley shells, plus comparison diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fourier_core import (
    PhysicalField,
    _check_same_grid,
    modulus_layout,
    sobolev_norm,
)
from .littlewood_paley import (
    DyadicPartition,
    PartitionMode,
    PartitionProfile,
    build_partition,
    project,
)

__all__ = [
    "BesovParams",
    "ShellNormProfile",
    "SobolevEquivalence",
    "bernstein_ratio",
    "besov_norm",
    "besov_norm_of",
    "extended_plancherel_besov_diagnostic",
    "hybrid_bernstein_bound",
    "lp_norm",
    "shell_lp_norms",
    "sobolev_equivalence_report",
]

INF = math.inf


@dataclass(frozen=True)
class BesovParams:
    s: float
    p: float = 2.0
    q: float = 2.0

    def __post_init__(self):
        if not math.isfinite(self.s):
            raise ValueError(f"s must be finite, got {self.s}")
        for name in ("p", "q"):
            v = float(getattr(self, name))
            if not v >= 1.0:
                raise ValueError(f"{name} must be >= 1 or inf, got {v}")
            object.__setattr__(self, name, v)

    @property
    def label(self) -> str:
        return f"besov_{self.s:g}_{self.p:g}_{self.q:g}"


@dataclass(frozen=True)
class ShellNormProfile:
    """Per-shell ``(j, ||Delta_j f||_p)`` pairs, ordered by ``j``."""

    values: tuple[tuple[int, float], ...]

    def __post_init__(self):
        vals = tuple((int(j), float(v)) for j, v in self.values)
        if any(v < 0 for _, v in vals):
            raise ValueError("shell norms must be nonnegative")
        object.__setattr__(self, "values", vals)

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def as_dict(self) -> dict[int, float]:
        return dict(self.values)

    def scaled(self, factor: float) -> ShellNormProfile:
        return ShellNormProfile(tuple((j, abs(factor) * v) for j, v in self.values))


def lp_norm(f: PhysicalField, p: float) -> float:
    """Discrete ``L^p`` norm with uniform weight ``(L/n)^d``; ``p=inf`` is the max."""
    p = float(p)
    if not p >= 1.0:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    a = np.abs(f.samples)
    if p == INF:
        return float(np.max(a))
    m = float(np.max(a))
    if m == 0.0:
        return 0.0
    # rescale to keep a**p in range for large p
    return m * (f.grid.cell_volume * float(np.sum((a / m) ** p))) ** (1.0 / p)


def shell_lp_norms(
    partition: DyadicPartition, f: PhysicalField, p: float
) -> ShellNormProfile:
    _check_same_grid(partition.grid, f.grid)
    if not float(p) >= 1.0:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    return ShellNormProfile(
        tuple((j, lp_norm(project(partition, f, j), p)) for j in partition.indices)
    )


def besov_norm(profile: ShellNormProfile, params: BesovParams) -> float:
    """Weighted ``l^q`` sum of ``2^(js) ||Delta_j f||_p``.

    Empty shells are skipped.  ``q = inf`` takes the supremum.
    """
    if len(profile) == 0:
        raise ValueError("shell profile is empty")
    terms = np.array(
        [2.0 ** (j * params.s) * v for j, v in profile if v > 0.0], dtype=float
    )
    if terms.size == 0:
        return 0.0
    top = float(terms.max())
    if params.q == INF:
        return top
    return top * float(np.sum((terms / top) ** params.q)) ** (1.0 / params.q)


def besov_norm_of(
    f: PhysicalField, params: BesovParams, partition: DyadicPartition
) -> float:
    return besov_norm(shell_lp_norms(partition, f, params.p), params)


@dataclass(frozen=True)
class SobolevEquivalence:
    besov: float
    sobolev: float
    ratio: float
    degenerate: bool = False


def sobolev_equivalence_report(
    f: PhysicalField, s: float, partition: DyadicPartition | None = None
) -> SobolevEquivalence:
    """Compare ``B^s_{2,2}`` with ``H^s`` on one field.

    Uses an energy partition with default annuli unless one is given.
    """
    if partition is None:
        partition = build_partition(f.grid, PartitionProfile(PartitionMode.ENERGY))
    besov = besov_norm_of(f, BesovParams(s, 2.0, 2.0), partition)
    sob = sobolev_norm(f, s)
    if sob == 0.0:
        return SobolevEquivalence(besov, sob, 1.0, degenerate=True)
    return SobolevEquivalence(besov, sob, besov / sob)


def bernstein_ratio(
    partition: DyadicPartition, f: PhysicalField, p: float
) -> list[tuple[int, float]]:
    """``||Delta_j f||_p / (2^(j d (1/p - 1/2)) ||Delta_j f||_2)`` per shell.

    Shells without energy report 0.
    """
    p = float(p)
    if not p >= 1.0:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    dim = f.grid.dim
    expo = dim * ((0.0 if p == INF else 1.0 / p) - 0.5)
    out = []
    for j in partition.indices:
        block = project(partition, f, j)
        l2 = lp_norm(block, 2.0)
        if l2 == 0.0:
            out.append((j, 0.0))
            continue
        out.append((j, lp_norm(block, p) / (2.0 ** (j * expo) * l2)))
    return out


def hybrid_bernstein_bound(
    partition: DyadicPartition, f: PhysicalField, params: BesovParams
) -> float:
    """Besov sum with each ``L^p`` shell norm replaced by its Bernstein bound.

    Evaluates ``(sum_j 2^(jsq) (2^(jd(1/p-1/2)) ||Delta_j f||_2)^q)^(1/q)``.
    """
    dim = f.grid.dim
    expo = dim * ((0.0 if params.p == INF else 1.0 / params.p) - 0.5)
    l2 = shell_lp_norms(partition, f, 2.0)
    bumped = ShellNormProfile(tuple((j, 2.0 ** (j * expo) * v) for j, v in l2))
    return besov_norm(bumped, params)


def extended_plancherel_besov_diagnostic(
    f: PhysicalField, params: BesovParams, partition: DyadicPartition | None = None
) -> dict[str, float]:
    """Besov norm of ``f`` next to that of its centred coefficient moduli.

    Both sides use an energy partition, so at ``p = q = 2``, ``s = 0`` they
    reduce to the two sides of Plancherel.
    """
    if partition is None:
        partition = build_partition(f.grid, PartitionProfile(PartitionMode.ENERGY))
    lhs = besov_norm_of(f, params, partition)
    rhs = besov_norm_of(modulus_layout(f), params, partition)
    return {"lhs": lhs, "rhs": rhs}
