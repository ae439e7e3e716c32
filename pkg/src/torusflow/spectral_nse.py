"""
Pseudo-spectral incompressible Navier-Stokes on the periodic torus.

The state is the array of Fourier coefficients of the velocity, shape
``(dim, n, ..., n)``.  Pressure never appears: the Leray projector removes
gradient components from the nonlinear term and the forcing.  Time stepping
is integrating-factor RK4 (Lawson form), so the viscous decay
``exp(-nu |xi|^2 dt)`` of each mode is applied exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np
from numpy.typing import NDArray

from .fourier_core import (
    PeriodicGrid,
    PhysicalField,
    SpectralField,
    forward_transform,
)

__all__ = [
    "BlowUpError",
    "CFLError",
    "Dealias",
    "FlowState",
    "Forcing",
    "SolverConfig",
    "Trajectory",
    "default_truncation",
    "divergence",
    "galerkin_mask",
    "leray_project",
    "leray_project_array",
    "nonlinear_term",
    "run",
    "step",
]

CFL_LIMIT = 0.5


class BlowUpError(FloatingPointError):
    """Non-finite coefficients appeared during time stepping."""

    def __init__(self, message: str, time: float, mode: tuple[int, ...] | None = None):
        super().__init__(message)
        self.time = time
        self.mode = mode


class CFLError(ValueError):
    pass


class Dealias(enum.Enum):
    TWO_THIRDS = "two_thirds"
    NONE = "none"


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    scheme: str = "ifrk4"
    dealias: Dealias = Dealias.TWO_THIRDS

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.scheme.lower() != "ifrk4":
            raise ValueError(f"unknown scheme {self.scheme!r}; only 'ifrk4' is available")
        object.__setattr__(self, "dealias", Dealias(self.dealias))


def default_truncation(grid: PeriodicGrid, dealias: Dealias = Dealias.TWO_THIRDS) -> int:
    """Largest retained mode number per axis.

    Two-thirds dealiasing keeps ``|m| < n/3``; otherwise everything except
    the Nyquist plane is kept.
    """
    n = grid.n_per_axis
    if Dealias(dealias) is Dealias.TWO_THIRDS:
        return math.ceil(n / 3) - 1
    return n // 2 - 1


def galerkin_mask(grid: PeriodicGrid, truncation: int) -> NDArray:
    mask = np.ones(grid.shape, dtype=bool)
    for m in grid.mode_indices:
        mask = mask & (np.abs(m) <= truncation)
    return mask


def _as_array(fields) -> tuple[PeriodicGrid | None, NDArray]:
    if isinstance(fields, np.ndarray):
        return None, fields
    fields = list(fields)
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise ValueError("velocity components live on different grids")
    return grid, np.stack([f.coeffs for f in fields])


def _leray(grid: PeriodicGrid, u_hat: NDArray) -> NDArray:
    ks = grid.wavevectors
    ksq = grid.k_squared
    inv = np.zeros_like(ksq)
    np.divide(1.0, ksq, out=inv, where=ksq > 0)
    kdotu = sum(k * u_hat[i] for i, k in enumerate(ks))
    return np.stack([u_hat[i] - k * kdotu * inv for i, k in enumerate(ks)])


def leray_project(fields):
    """Remove the gradient part of a vector field, mode by mode.

    ``u -> u - xi (xi . u) / |xi|^2``; the mean mode passes unchanged.
    Takes and returns a sequence of :class:`SpectralField` components; see
    :func:`leray_project_array` for raw coefficient arrays.
    """
    grid, arr = _as_array(fields)
    if grid is None:
        raise TypeError("pass SpectralField components; use leray_project_array for arrays")
    out = _leray(grid, arr)
    return tuple(SpectralField(grid, c) for c in out)


def leray_project_array(grid: PeriodicGrid, u_hat: NDArray) -> NDArray:
    return _leray(grid, u_hat)


def divergence(grid: PeriodicGrid, u_hat: NDArray) -> NDArray:
    """Spectral divergence ``i xi . u``."""
    return sum(1j * k * u_hat[i] for i, k in enumerate(grid.wavevectors))


@dataclass(frozen=True)
class FlowState:
    grid: PeriodicGrid
    velocity: NDArray = field(repr=False)
    time: float = 0.0
    nu: float = 0.1
    truncation: int | None = None

    def __post_init__(self):
        u = np.array(self.velocity, dtype=complex)
        if u.shape != (self.grid.dim,) + self.grid.shape:
            raise ValueError(
                f"velocity must have shape {(self.grid.dim,) + self.grid.shape}, got {u.shape}"
            )
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        trunc = self.truncation
        if trunc is None:
            trunc = default_truncation(self.grid)
        if not 0 <= trunc < self.grid.n_per_axis // 2:
            raise ValueError(f"truncation must lie in [0, n/2), got {trunc}")
        u.flags.writeable = False
        object.__setattr__(self, "velocity", u)
        object.__setattr__(self, "truncation", int(trunc))

    @classmethod
    def from_physical(
        cls,
        components,
        nu: float,
        time: float = 0.0,
        truncation: int | None = None,
        project: bool = True,
    ) -> FlowState:
        """Build a state from physical components, truncated and projected."""
        comps = list(components)
        grid = comps[0].grid
        u_hat = np.stack([forward_transform(c).coeffs for c in comps])
        probe = cls(grid, np.zeros_like(u_hat), time, nu, truncation)
        u_hat = u_hat * galerkin_mask(grid, probe.truncation)
        if project:
            u_hat = _leray(grid, u_hat)
        return replace(probe, velocity=u_hat)

    @classmethod
    def zeros(cls, grid: PeriodicGrid, nu: float, truncation: int | None = None) -> FlowState:
        return cls(grid, np.zeros((grid.dim,) + grid.shape, dtype=complex), 0.0, nu, truncation)

    @property
    def components(self) -> tuple[SpectralField, ...]:
        return tuple(SpectralField(self.grid, c) for c in self.velocity)

    def physical(self) -> NDArray:
        """Velocity samples, shape ``(dim, n, ..., n)``."""
        return np.fft.ifftn(self.velocity, axes=self._axes, norm="forward").real

    def physical_components(self) -> tuple[PhysicalField, ...]:
        return tuple(PhysicalField(self.grid, u) for u in self.physical())

    @property
    def _axes(self) -> tuple[int, ...]:
        return tuple(range(1, self.grid.dim + 1))

    def max_divergence_ratio(self) -> float:
        """Max over modes of ``|xi . u(xi)| / (|xi| |u(xi)|)``."""
        num = np.abs(sum(k * self.velocity[i] for i, k in enumerate(self.grid.wavevectors)))
        den = self.grid.k_magnitude * np.sqrt(np.sum(np.abs(self.velocity) ** 2, axis=0))
        ok = den > 0
        return float(np.max(num[ok] / den[ok], initial=0.0))


class Forcing:
    """Body force: none, steady, or a steady pattern times ``amplitude(t)``.

    The spatial pattern is Leray-projected at construction.
    """

    def __init__(
        self,
        kind: str = "none",
        base: NDArray | None = None,
        amplitude: Callable[[float], float] | None = None,
        grid: PeriodicGrid | None = None,
    ):
        if kind not in ("none", "steady", "modulated"):
            raise ValueError(f"unknown forcing kind {kind!r}")
        self.kind = kind
        self.amplitude = amplitude
        self.base = None
        if kind == "none":
            return
        if base is None or grid is None:
            raise ValueError(f"{kind} forcing needs a base field and a grid")
        if kind == "modulated" and amplitude is None:
            raise ValueError("modulated forcing needs an amplitude function")
        base = _leray(grid, np.array(base, dtype=complex))
        base.flags.writeable = False
        self.base = base

    @classmethod
    def none(cls) -> Forcing:
        return cls("none")

    @classmethod
    def steady(cls, grid: PeriodicGrid, components) -> Forcing:
        return cls("steady", _as_array(components)[1], grid=grid)

    @classmethod
    def modulated(cls, grid: PeriodicGrid, components, amplitude) -> Forcing:
        return cls("modulated", _as_array(components)[1], amplitude, grid=grid)

    @property
    def active(self) -> bool:
        return self.kind != "none"

    def coeffs(self, t: float) -> NDArray | None:
        if self.kind == "none":
            return None
        if self.kind == "steady":
            return self.base
        return self.amplitude(t) * self.base


def _check_finite(u_hat: NDArray, time: float):
    bad = ~np.isfinite(u_hat)
    if bad.any():
        idx = np.unravel_index(int(np.argmax(bad)), bad.shape)
        raise BlowUpError(
            f"non-finite velocity coefficient at t={time:.6g}, "
            f"component {idx[0]}, mode index {idx[1:]}",
            time,
            tuple(int(i) for i in idx),
        )


class _Operator:
    """Precomputed pieces for one (grid, truncation, dealias, nu, dt) setup."""

    def __init__(self, grid: PeriodicGrid, truncation: int, nu: float, config: SolverConfig | None):
        self.grid = grid
        self.axes = tuple(range(1, grid.dim + 1))
        mask = galerkin_mask(grid, truncation)
        dealias = config.dealias if config is not None else Dealias.TWO_THIRDS
        if dealias is Dealias.TWO_THIRDS:
            mask = mask & galerkin_mask(grid, default_truncation(grid, Dealias.TWO_THIRDS))
        self.mask = mask
        self.ik = [1j * k for k in grid.wavevectors]
        self.config = config
        if config is not None:
            self.decay = np.exp(-nu * grid.k_squared * config.dt)
            self.half_decay = np.exp(-nu * grid.k_squared * config.dt / 2.0)

    def advection(self, u_hat: NDArray, check_cfl: bool = True) -> NDArray:
        """``P[(u . grad) u]``, dealiased, in spectral space."""
        grid = self.grid
        u = np.fft.ifftn(u_hat, axes=self.axes, norm="forward").real
        if check_cfl and self.config is not None:
            speed = float(np.max(np.sqrt(np.sum(u**2, axis=0))))
            cfl = speed * self.config.dt / grid.spacing
            if cfl > CFL_LIMIT:
                raise CFLError(
                    f"CFL number {cfl:.3g} exceeds {CFL_LIMIT}; reduce dt below "
                    f"{CFL_LIMIT * grid.spacing / speed:.3g}"
                )
        out = np.empty_like(u_hat)
        for i in range(grid.dim):
            adv = np.zeros(grid.shape)
            for j in range(grid.dim):
                du = np.fft.ifftn(self.ik[j] * u_hat[i], norm="forward").real
                adv += u[j] * du
            out[i] = np.fft.fftn(adv, norm="forward")
        out *= self.mask
        return _leray(grid, out)

    def rhs(self, u_hat: NDArray, forcing: Forcing, t: float) -> NDArray:
        r = -self.advection(u_hat)
        f = forcing.coeffs(t)
        if f is not None:
            r = r + f * self.mask
        return r


def nonlinear_term(state: FlowState, config: SolverConfig | None = None):
    """Projected, dealiased advection term ``P[(u . grad) u]``.

    Returns one :class:`SpectralField` per component.  With a ``config`` the
    CFL number ``max|u| dt / dx`` is checked first.
    """
    op = _Operator(state.grid, state.truncation, state.nu, config)
    out = op.advection(state.velocity)
    return tuple(SpectralField(state.grid, c) for c in out)


def _ifrk4(op: _Operator, u: NDArray, forcing: Forcing, t: float) -> NDArray:
    dt = op.config.dt
    E, E2 = op.decay, op.half_decay
    k1 = op.rhs(u, forcing, t)
    k2 = op.rhs(E2 * (u + 0.5 * dt * k1), forcing, t + 0.5 * dt)
    k3 = op.rhs(E2 * u + 0.5 * dt * k2, forcing, t + 0.5 * dt)
    k4 = op.rhs(E * u + dt * E2 * k3, forcing, t + dt)
    return E * u + (dt / 6.0) * (E * k1 + 2.0 * E2 * (k2 + k3) + k4)


def step(state: FlowState, forcing: Forcing, config: SolverConfig, _op: _Operator | None = None) -> FlowState:
    """Advance one step of size ``config.dt``."""
    op = _op or _Operator(state.grid, state.truncation, state.nu, config)
    with np.errstate(over="ignore", invalid="ignore"):
        u_new = _ifrk4(op, state.velocity, forcing, state.time)
    t_new = state.time + config.dt
    _check_finite(u_new, t_new)
    return replace(state, velocity=u_new * op.mask, time=t_new)


Observer = Callable[[FlowState, Forcing], "float | NDArray"]


@dataclass
class Trajectory:
    """Observer samples and the final state of a run."""

    times: NDArray
    series: dict[str, NDArray]
    final: FlowState
    steps: int = 0

    def __len__(self):
        return len(self.times)

    def __getitem__(self, name: str) -> NDArray:
        if name not in self.series:
            raise KeyError(
                f"trajectory has no {name!r} series (recorded: {sorted(self.series)})"
            )
        return self.series[name]


def run(
    state: FlowState,
    forcing: Forcing,
    config: SolverConfig,
    t_end: float,
    observers: Mapping[str, Observer] | None = None,
    cadence: float | None = None,
) -> Trajectory:
    """Integrate to ``t_end``, sampling observers every ``cadence``.

    The initial state is sampled too.  ``t_end - state.time`` must be a
    whole number of steps, and ``cadence`` a whole number of steps.
    """
    observers = dict(observers or {})
    span = t_end - state.time
    if span < 0:
        raise ValueError(f"t_end={t_end} precedes the state time {state.time}")
    if span == 0:
        return Trajectory(np.zeros(0), {name: np.zeros(0) for name in observers}, state, 0)
    nsteps = int(round(span / config.dt))
    if nsteps == 0 or abs(nsteps * config.dt - span) > 1e-9 * max(1.0, span):
        raise ValueError(f"t_end - t0 = {span} is not a multiple of dt = {config.dt}")
    cadence = config.dt if cadence is None else cadence
    every = int(round(cadence / config.dt))
    if every < 1 or abs(every * config.dt - cadence) > 1e-9 * cadence:
        raise ValueError(f"cadence {cadence} is not a multiple of dt = {config.dt}")

    op = _Operator(state.grid, state.truncation, state.nu, config)
    t0 = state.time
    times: list[float] = []
    samples: dict[str, list] = {name: [] for name in observers}

    def observe(s: FlowState):
        times.append(s.time)
        for name, fn in observers.items():
            samples[name].append(fn(s, forcing))

    observe(state)
    for i in range(1, nsteps + 1):
        state = step(state, forcing, config, op)
        # avoid accumulating dt round-off in the clock
        state = replace(state, time=t0 + i * config.dt)
        if i % every == 0:
            observe(state)
    series = {name: np.asarray(vals) for name, vals in samples.items()}
    return Trajectory(np.asarray(times), series, state, nsteps)
