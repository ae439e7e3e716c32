"""Spectral analysis and simulation of incompressible flow on periodic tori.

Dyadic frequency decompositions, Sobolev and Besov norms, a Fourier-Galerkin
Navier-Stokes solver with energy and bound diagnostics, and quaternion
spectral scans.
"""

from .fourier_core import (
    PeriodicGrid,
    PhysicalField,
    SpectralField,
    forward_transform,
    inverse_transform,
    random_field,
    sobolev_norm,
)
from .littlewood_paley import PartitionMode, PartitionProfile, build_partition
from .besov import BesovParams, besov_norm, besov_norm_of, shell_lp_norms
from .spectral_nse import FlowState, Forcing, SolverConfig, run, step

__version__ = "0.1.0"

__all__ = [
    "BesovParams",
    "FlowState",
    "Forcing",
    "PartitionMode",
    "PartitionProfile",
    "PeriodicGrid",
    "PhysicalField",
    "SolverConfig",
    "SpectralField",
    "besov_norm",
    "besov_norm_of",
    "build_partition",
    "forward_transform",
    "inverse_transform",
    "random_field",
    "run",
    "shell_lp_norms",
    "sobolev_norm",
    "step",
]
