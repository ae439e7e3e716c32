"""
Energy budgets, shell-by-shell dissipation and Grönwall-type bound checks.

Conventions: ``energy`` is the kinetic energy ``1/2 ||u||^2`` while shell
energies ``E_j = ||Delta_j u||^2`` carry no factor one half, so for an
energy partition ``sum_j E_j = 2 * energy``.  The dissipation rate is
reported positive, ``nu ||grad u||^2``, and for a solution

    dE/dt = -dissipation + forcing_power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from numpy.typing import NDArray

from .besov import BesovParams, besov_norm, ShellNormProfile
from .fourier_core import sobolev_weights
from .littlewood_paley import DyadicPartition, PartitionMode
from .spectral_nse import FlowState, Forcing, Trajectory

__all__ = [
    "BoundReport",
    "DissipationProfile",
    "EnergyRecord",
    "besov_apriori_check",
    "dissipation_rate",
    "energy",
    "energy_identity_residual",
    "energy_record",
    "energy_records",
    "forcing_power",
    "gronwall_bound_check",
    "high_frequency_dominance",
    "l2_norm",
    "shell_dissipation",
    "shell_dissipations",
    "shell_energies",
    "shell_transfer_residuals",
    "standard_observers",
    "vector_besov_norm",
    "vector_sobolev_norm",
]

GRONWALL_SLACK = 1e-9


def _spectral_sum(state: FlowState, weight) -> float:
    return state.grid.volume * float(np.sum(weight * np.abs(state.velocity) ** 2))


def energy(state: FlowState) -> float:
    """Kinetic energy ``1/2 sum_k ||u_k||^2``."""
    return 0.5 * _spectral_sum(state, 1.0)


def l2_norm(state: FlowState) -> float:
    return math.sqrt(2.0 * energy(state))


def dissipation_rate(state: FlowState) -> float:
    """``nu ||grad u||^2`` (positive; energy decays at this rate)."""
    return state.nu * _spectral_sum(state, state.grid.k_squared)


def forcing_power(state: FlowState, forcing: Forcing) -> float:
    """``integral f . u`` at the state's time."""
    f = forcing.coeffs(state.time)
    if f is None:
        return 0.0
    return state.grid.volume * float(np.sum((np.conj(f) * state.velocity).real))


def forcing_l2(state: FlowState, forcing: Forcing) -> float:
    f = forcing.coeffs(state.time)
    if f is None:
        return 0.0
    return math.sqrt(state.grid.volume * float(np.sum(np.abs(f) ** 2)))


def _require_energy(partition: DyadicPartition):
    if partition.mode is not PartitionMode.ENERGY:
        raise ValueError("shell budgets need an energy-mode partition")


def shell_energies(state: FlowState, partition: DyadicPartition) -> NDArray:
    """``||Delta_j u||^2`` for every shell, low block first."""
    return np.array(
        [_spectral_sum(state, partition.multiplier(j) ** 2) for j in partition.indices]
    )


def shell_dissipation(state: FlowState, partition: DyadicPartition, j: int) -> float:
    """``2 nu ||grad Delta_j u||^2``."""
    _require_energy(partition)
    w = state.grid.k_squared * partition.multiplier(j) ** 2
    return 2.0 * state.nu * _spectral_sum(state, w)


def shell_dissipations(state: FlowState, partition: DyadicPartition) -> NDArray:
    return np.array([shell_dissipation(state, partition, j) for j in partition.indices])


@dataclass(frozen=True)
class EnergyRecord:
    time: float
    total_energy: float
    enstrophy_like: float
    forcing_power: float
    shell_energies: tuple[tuple[int, float], ...] = ()


def energy_record(
    state: FlowState, forcing: Forcing, partition: DyadicPartition | None = None
) -> EnergyRecord:
    shells = ()
    if partition is not None:
        shells = tuple(zip(partition.indices, shell_energies(state, partition).tolist()))
    return EnergyRecord(
        state.time,
        energy(state),
        dissipation_rate(state),
        forcing_power(state, forcing),
        shells,
    )


def energy_records(trajectory: Trajectory) -> list[EnergyRecord]:
    """Rebuild records from a trajectory's energy/dissipation/forcing series."""
    e = trajectory["energy"]
    d = trajectory["dissipation"]
    p = trajectory.series.get("forcing_power", np.zeros_like(e))
    return [
        EnergyRecord(float(t), float(ei), float(di), float(pi))
        for t, ei, di, pi in zip(trajectory.times, e, d, p)
    ]


def _check_uniform(times: NDArray) -> float:
    dt = np.diff(times)
    h = float(dt.mean())
    if np.any(np.abs(dt - h) > 1e-9 * max(abs(h), 1e-300)):
        raise ValueError("samples must have a uniform cadence")
    return h


def energy_identity_residual(records: Sequence[EnergyRecord]) -> float:
    """Worst relative defect of ``dE/dt + dissipation - forcing_power``.

    ``dE/dt`` is a centred difference over neighbouring samples, so the
    defect is second order in the cadence.  Each interior sample is
    normalised by its own dissipation rate.
    """
    if len(records) < 3:
        raise ValueError("need at least three samples")
    t = np.array([r.time for r in records])
    h = _check_uniform(t)
    e = np.array([r.total_energy for r in records])
    d = np.array([r.enstrophy_like for r in records])
    p = np.array([r.forcing_power for r in records])
    dedt = (e[2:] - e[:-2]) / (2.0 * h)
    defect = np.abs(dedt + d[1:-1] - p[1:-1])
    return float(np.max(defect / np.maximum(d[1:-1], 1e-300)))


def shell_transfer_residuals(trajectory: Trajectory) -> tuple[NDArray, NDArray]:
    """Centred ``dE_j/dt + 2 nu ||grad Delta_j u||^2`` per interior sample.

    Zero for linear (Stokes) flow; on nonlinear runs it is the net
    inter-shell transfer.  Returns ``(times, residuals[time, shell])``.
    """
    t = trajectory.times
    if len(t) < 3:
        raise ValueError("need at least three samples")
    h = _check_uniform(t)
    ej = trajectory["shell_energies"]
    dj = trajectory["shell_dissipation"]
    dedt = (ej[2:] - ej[:-2]) / (2.0 * h)
    return t[1:-1], dedt + dj[1:-1]


@dataclass(frozen=True)
class DissipationProfile:
    fractions: dict[int, float]
    dissipation_mean_shell: float
    energy_mean_shell: float
    degenerate: bool = False

    @property
    def high_frequency_dominant(self) -> bool:
        return not self.degenerate and self.dissipation_mean_shell > self.energy_mean_shell


def high_frequency_dominance(state: FlowState, partition: DyadicPartition) -> DissipationProfile:
    """Per-shell share of dissipation, with energy- and dissipation-weighted
    mean shell indices for comparison."""
    _require_energy(partition)
    js = np.array(list(partition.indices), dtype=float)
    diss = shell_dissipations(state, partition)
    ener = shell_energies(state, partition)
    if diss.sum() == 0.0:
        return DissipationProfile({int(j): 0.0 for j in js}, 0.0, 0.0, degenerate=True)
    frac = diss / diss.sum()
    return DissipationProfile(
        {int(j): float(f) for j, f in zip(js, frac)},
        float(np.sum(js * frac)),
        float(np.sum(js * ener / ener.sum())),
    )


# -- norms of vector fields -----------------------------------------------


def vector_sobolev_norm(state: FlowState, s: float) -> float:
    return math.sqrt(_spectral_sum(state, sobolev_weights(state.grid, s)))


def vector_shell_lp_norms(
    state: FlowState, partition: DyadicPartition, p: float
) -> ShellNormProfile:
    """``|| |Delta_j u| ||_p`` with ``|.|`` the pointwise Euclidean length."""
    grid = state.grid
    axes = tuple(range(1, grid.dim + 1))
    vals = []
    for j in partition.indices:
        block = np.fft.ifftn(partition.multiplier(j) * state.velocity, axes=axes, norm="forward").real
        mag = np.sqrt(np.sum(block**2, axis=0))
        m = float(mag.max())
        if m == 0.0:
            vals.append((j, 0.0))
        elif p == math.inf:
            vals.append((j, m))
        else:
            vals.append((j, m * (grid.cell_volume * float(np.sum((mag / m) ** p))) ** (1.0 / p)))
    return ShellNormProfile(tuple(vals))


def vector_besov_norm(state: FlowState, params: BesovParams, partition: DyadicPartition) -> float:
    return besov_norm(vector_shell_lp_norms(state, partition, params.p), params)


def _forcing_state(state: FlowState, forcing: Forcing) -> FlowState | None:
    f = forcing.coeffs(state.time)
    if f is None:
        return None
    return FlowState(state.grid, f, state.time, state.nu, state.truncation)


def standard_observers(
    partition: DyadicPartition | None = None,
    sobolev_orders: Sequence[float] = (),
    besov_params: Sequence[BesovParams] = (),
) -> dict:
    """Observer callables keyed by series name, for :func:`spectral_nse.run`."""
    obs = {
        "energy": lambda s, f: energy(s),
        "dissipation": lambda s, f: dissipation_rate(s),
        "forcing_power": forcing_power,
        "l2_norm": lambda s, f: l2_norm(s),
        "forcing_l2": forcing_l2,
    }
    if partition is not None:
        obs["shell_energies"] = lambda s, f: shell_energies(s, partition)
        if partition.mode is PartitionMode.ENERGY:
            obs["shell_dissipation"] = lambda s, f: shell_dissipations(s, partition)
    for order in sobolev_orders:
        obs[f"sobolev_{order:g}"] = lambda s, f, order=order: vector_sobolev_norm(s, order)
    for params in besov_params:
        if partition is None:
            raise ValueError("Besov observers need a partition")

        def u_norm(s, f, params=params):
            return vector_besov_norm(s, params, partition)

        def f_norm(s, f, params=params):
            fs = _forcing_state(s, f)
            return 0.0 if fs is None else vector_besov_norm(fs, params, partition)

        obs[params.label] = u_norm
        obs[f"forcing_{params.label}"] = f_norm
    return obs


# -- bound checks ---------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    times: NDArray = field(repr=False)
    lhs_series: NDArray = field(repr=False)
    rhs_series: NDArray = field(repr=False)
    satisfied: bool
    worst_margin: float
    constant: float | None = None

    def as_dict(self) -> dict:
        out = {
            "bound": self.bound_name,
            "satisfied": bool(self.satisfied),
            "worst_margin": _json_float(self.worst_margin),
            "samples": int(len(self.times)),
        }
        if self.constant is not None:
            out["constant"] = _json_float(self.constant)
        return out


def _json_float(x: float):
    x = float(x)
    return x if math.isfinite(x) else str(x)


def _cumulative_trapezoid(t: NDArray, y: NDArray) -> NDArray:
    out = np.zeros_like(y, dtype=float)
    if len(t) > 1:
        out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def _report(name: str, t: NDArray, lhs: NDArray, rhs: NDArray, constant=None) -> BoundReport:
    with np.errstate(invalid="ignore"):
        margin = rhs - lhs
    ok = lhs <= rhs + GRONWALL_SLACK * np.maximum(1.0, np.abs(np.nan_to_num(rhs, posinf=0.0)))
    worst = float(np.min(margin)) if len(margin) else 0.0
    return BoundReport(name, t, lhs, rhs, bool(np.all(ok)), worst, constant)


def _series(trajectory: Trajectory, name: str) -> NDArray:
    if name not in trajectory.series:
        raise KeyError(f"bound check needs the {name!r} observer, which was not recorded")
    return np.asarray(trajectory.series[name], dtype=float)


def gronwall_bound_check(
    trajectory: Trajectory,
    u0_norm: float | None = None,
    f_norm_series: NDArray | None = None,
) -> tuple[BoundReport, BoundReport]:
    """Check both Grönwall-type L2 bounds along a trajectory.

    * ``l2_energy``: ``||u(t)||^2 <= (||u0||^2 + int_0^t ||f||^2) exp(int_0^t ||f||)``
    * ``exp_integral``: ``||u(t)|| <= exp(int_0^t ||u||^2) (||u0|| + int_0^t ||f||)``

    Integrals use the trapezoidal rule on the observer samples.  The
    trajectory must carry ``l2_norm``; the forcing norm defaults to its
    ``forcing_l2`` series.
    """
    t = np.asarray(trajectory.times, dtype=float)
    u = _series(trajectory, "l2_norm")
    f = _series(trajectory, "forcing_l2") if f_norm_series is None else np.asarray(f_norm_series, float)
    u0 = float(u[0]) if u0_norm is None else float(u0_norm)

    int_f = _cumulative_trapezoid(t, f)
    int_f2 = _cumulative_trapezoid(t, f**2)
    int_u2 = _cumulative_trapezoid(t, u**2)
    with np.errstate(over="ignore"):
        rhs1 = (u0**2 + int_f2) * np.exp(int_f)
        rhs2 = np.exp(int_u2) * (u0 + int_f)
    return (
        _report("l2_energy", t, u**2, rhs1),
        _report("exp_integral", t, u, rhs2),
    )


def besov_apriori_check(
    trajectory: Trajectory,
    params: BesovParams,
    u0_besov: float | None = None,
    f_besov_series: NDArray | None = None,
) -> BoundReport:
    """Smallest ``C`` with ``||u(t)||_B <= C (||u0||_B + int_0^T ||f||_B)``.

    The bound is satisfied when that ``C`` is finite; a trajectory that is
    identically zero is degenerate and reported with ``C = 0``.
    """
    t = np.asarray(trajectory.times, dtype=float)
    u = _series(trajectory, params.label)
    if f_besov_series is None:
        f_besov_series = _series(trajectory, f"forcing_{params.label}")
    f = np.asarray(f_besov_series, dtype=float)
    u0 = float(u[0]) if u0_besov is None else float(u0_besov)
    base = u0 + (float(_cumulative_trapezoid(t, f)[-1]) if len(t) else 0.0)
    peak = float(np.max(u)) if len(u) else 0.0
    if base > 0.0:
        c = peak / base
    else:
        c = 0.0 if peak == 0.0 else math.inf
    rhs = np.full_like(u, c * base)
    report = _report(f"besov_apriori_{params.label}", t, u, rhs, constant=c)
    return BoundReport(
        report.bound_name, t, u, rhs, math.isfinite(c), report.worst_margin, c
    )


def summarize_bounds(reports: Mapping[str, BoundReport]) -> dict:
    return {name: r.as_dict() for name, r in reports.items()}
