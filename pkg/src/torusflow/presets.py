"""Built-in initial conditions, forcings and run presets."""

from __future__ import annotations

import math

import numpy as np

from .fourier_core import PeriodicGrid, PhysicalField, forward_transform
from .spectral_nse import FlowState, Forcing, galerkin_mask, leray_project_array

__all__ = [
    "INITIAL_KINDS",
    "make_forcing",
    "make_initial_state",
    "random_div_free",
    "shear",
    "taylor_green",
    "two_shell",
]


def _stack_physical(grid: PeriodicGrid, comps) -> np.ndarray:
    return np.stack([forward_transform(PhysicalField(grid, c)).coeffs for c in comps])


def shear(grid: PeriodicGrid, wavenumber: int, amplitude: float) -> np.ndarray:
    """Coefficients of ``(A sin(k x2), 0[, 0])``, an exact Stokes mode."""
    x = grid.coordinates()
    k = wavenumber * 2.0 * math.pi / grid.length
    comps = [amplitude * np.sin(k * x[1])] + [np.zeros(grid.shape)] * (grid.dim - 1)
    return _stack_physical(grid, comps)


def taylor_green(grid: PeriodicGrid, amplitude: float = 1.0) -> np.ndarray:
    """``(sin x1 cos x2, -cos x1 sin x2[, 0])`` scaled by ``amplitude``."""
    x = grid.coordinates()
    k = 2.0 * math.pi / grid.length
    u = amplitude * np.sin(k * x[0]) * np.cos(k * x[1])
    v = -amplitude * np.cos(k * x[0]) * np.sin(k * x[1])
    comps = [u, v] + [np.zeros(grid.shape)] * (grid.dim - 2)
    return _stack_physical(grid, comps)


def two_shell(grid: PeriodicGrid, low: int, high: int, amplitude: float = 1.0) -> np.ndarray:
    """Shear flow with equal energy at mode numbers ``low`` and ``high``.

    Powers of two sit exactly where a default partition's shell equals one.
    """
    return shear(grid, low, amplitude) + shear(grid, high, amplitude)


def random_div_free(
    grid: PeriodicGrid,
    rng: np.random.Generator,
    rms: float = 1.0,
    peak: float = 4.0,
    truncation: int | None = None,
) -> np.ndarray:
    """Solenoidal random velocity with a Gaussian spectral envelope.

    Real white noise is filtered by ``exp(-(|xi|/peak)^2)``, truncated,
    projected and rescaled to the requested rms speed.
    """
    noise = rng.standard_normal((grid.dim,) + grid.shape)
    axes = tuple(range(1, grid.dim + 1))
    u_hat = np.fft.fftn(noise, axes=axes, norm="forward")
    u_hat *= np.exp(-((grid.k_magnitude / peak) ** 2))
    u_hat[(slice(None),) + (0,) * grid.dim] = 0.0
    if truncation is not None:
        u_hat *= galerkin_mask(grid, truncation)
    u_hat *= ~grid.nyquist_mask
    u_hat = leray_project_array(grid, u_hat)
    energy = float(np.sum(np.abs(u_hat) ** 2))
    if energy == 0.0:
        return u_hat
    return u_hat * (rms / math.sqrt(energy))


INITIAL_KINDS = ("zero", "taylor-green", "shear", "two-shell", "random-div-free", "files")


def make_initial_state(
    grid: PeriodicGrid,
    nu: float,
    kind: str,
    params: dict,
    rng: np.random.Generator,
    truncation: int | None = None,
    fields=None,
) -> FlowState:
    """Initial state by kind; the result is truncated and Leray-projected."""
    probe = FlowState.zeros(grid, nu, truncation)
    trunc = probe.truncation
    if kind == "zero":
        u_hat = np.zeros_like(probe.velocity)
    elif kind == "taylor-green":
        u_hat = taylor_green(grid, float(params.get("amplitude", 1.0)))
    elif kind == "shear":
        u_hat = shear(grid, int(params.get("wavenumber", 1)), float(params.get("amplitude", 1.0)))
    elif kind == "two-shell":
        u_hat = two_shell(
            grid,
            int(params.get("low", 4)),
            int(params.get("high", 32)),
            float(params.get("amplitude", 1.0)),
        )
    elif kind == "random-div-free":
        u_hat = random_div_free(
            grid,
            rng,
            float(params.get("rms", 1.0)),
            float(params.get("peak", 4.0)),
            trunc,
        )
    elif kind == "files":
        if fields is None or len(fields) != grid.dim:
            raise ValueError(f"'files' initial condition needs {grid.dim} component fields")
        u_hat = np.stack([forward_transform(f).coeffs for f in fields])
    else:
        raise ValueError(f"unknown initial condition {kind!r}; choose from {INITIAL_KINDS}")
    u_hat = leray_project_array(grid, u_hat * galerkin_mask(grid, trunc))
    return FlowState(grid, u_hat, 0.0, nu, trunc)


def make_forcing(grid: PeriodicGrid, kind: str, params: dict) -> Forcing:
    """Shear-pattern forcing ``(A sin(k x2), 0)``, optionally modulated by
    ``1 + depth sin(omega t)``."""
    if kind == "none":
        return Forcing.none()
    base = shear(grid, int(params.get("wavenumber", 1)), float(params.get("amplitude", 0.1)))
    if kind == "steady":
        return Forcing("steady", base, grid=grid)
    if kind == "modulated":
        depth = float(params.get("depth", 0.5))
        omega = float(params.get("omega", 1.0))
        return Forcing("modulated", base, lambda t: 1.0 + depth * math.sin(omega * t), grid=grid)
    raise ValueError(f"unknown forcing kind {kind!r}")
