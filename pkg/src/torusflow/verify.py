"""Self-verification suites run by ``torusflow verify``.

Each suite returns a :class:`SuiteResult`; a failing check names the
invariant it broke.  The ``quick`` level keeps to N=32 grids.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import diagnostics as diag
from . import regression
from .besov import bernstein_ratio, sobolev_equivalence_report
from .config import PRESETS, RunConfig
from .fourier_core import (
    PeriodicGrid,
    forward_transform,
    inverse_transform,
    l2_norm,
    plancherel_residual,
    random_field,
    sobolev_norm,
    spectral_derivative,
)
from .littlewood_paley import (
    DyadicPartition,
    PartitionMode,
    PartitionProfile,
    build_partition,
    partition_residual,
    reconstruction_residual,
)
from .presets import make_initial_state, random_div_free
from .quaternion_dynamics import (
    BifurcationScan,
    Quaternion,
    builtin_family,
    find_crossing,
    hamilton_product,
    left_mult_operator,
    spectrum,
)
from .simulation import simulate, trajectory_csv
from .spectral_nse import FlowState, Forcing, SolverConfig, nonlinear_term, run

__all__ = ["LEVELS", "SuiteResult", "run_suites", "format_table"]

LEVELS = ("quick", "default")


@dataclass
class SuiteResult:
    name: str
    worst: dict[str, float] = field(default_factory=dict)
    violations: dict[str, int] = field(default_factory=dict)
    limits: dict[str, str] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.violations and not self.errors

    @property
    def failures(self) -> list[str]:
        out = [
            f"{name} violated {count}x (worst {self.worst[name]:.3e}, limit {self.limits[name]})"
            for name, count in self.violations.items()
        ]
        return out + self.errors

    def check(self, invariant: str, value: float, limit: float, upper: bool = True):
        """Record ``value <= limit`` (or ``>=`` when ``upper`` is False)."""
        value = float(value)
        ok = value <= limit if upper else value >= limit
        prev = self.worst.get(invariant)
        if prev is None or not math.isfinite(value) or (value > prev if upper else value < prev):
            self.worst[invariant] = value
        self.limits[invariant] = f"{'<=' if upper else '>='} {limit:.3e}"
        if not (ok and math.isfinite(value)):
            self.violations[invariant] = self.violations.get(invariant, 0) + 1


def _grids(level: str) -> list[PeriodicGrid]:
    if level == "quick":
        return [PeriodicGrid(2, 32)]
    return [PeriodicGrid(2, 32), PeriodicGrid(2, 64), PeriodicGrid(2, 128), PeriodicGrid(3, 32)]


def _fields(grid: PeriodicGrid, count: int, seed: int):
    rng = np.random.default_rng(seed)
    return [random_field(grid, rng) for _ in range(count)]


def _corrupt(partition: DyadicPartition) -> DyadicPartition:
    bad = dict(partition.multipliers)
    bad[0] = 1.01 * bad[0]
    return replace(partition, multipliers=bad)


def suite_plancherel(level: str, r: SuiteResult, fault: str | None):
    for grid in _grids(level):
        for f in _fields(grid, 100, 11):
            r.check("plancherel", plancherel_residual(f), 1e-10)


def suite_partition(level: str, r: SuiteResult, fault: str | None):
    for grid in _grids(level):
        for mode in PartitionMode:
            part = build_partition(grid, PartitionProfile(mode))
            if fault == "partition":
                part = _corrupt(part)
            r.check(f"partition_of_unity[{mode.value}]", partition_residual(part), 1e-12)
            if mode is PartitionMode.RECONSTRUCTION:
                for f in _fields(grid, 100 if grid.dim == 2 and grid.n_per_axis <= 64 else 20, 12):
                    r.check("reconstruction", reconstruction_residual(part, f), 1e-10)


def suite_sobolev(level: str, r: SuiteResult, fault: str | None):
    for grid in _grids(level):
        for f in _fields(grid, 10, 13):
            grad2 = 0.0
            for axis in range(grid.dim):
                alpha = [0] * grid.dim
                alpha[axis] = 1
                g = inverse_transform(spectral_derivative(forward_transform(f), alpha))
                grad2 += l2_norm(g) ** 2
            h1 = math.sqrt(l2_norm(f) ** 2 + grad2)
            r.check("sobolev_h1_vs_gradient", abs(sobolev_norm(f, 1.0) - h1) / h1, 1e-10)
            r.check("sobolev_h0_vs_l2", abs(sobolev_norm(f, 0.0) - l2_norm(f)) / l2_norm(f), 1e-12)
            norms = [sobolev_norm(f, s) for s in (-1.0, 0.0, 0.5, 1.0, 2.0)]
            r.check("sobolev_monotone", max(0.0, max(a - b for a, b in zip(norms, norms[1:]))), 0.0)


def suite_besov(level: str, r: SuiteResult, fault: str | None):
    for grid in _grids(level):
        part = build_partition(grid, PartitionProfile(PartitionMode.ENERGY))
        recon = build_partition(grid, PartitionProfile(PartitionMode.RECONSTRUCTION))
        count = 20 if grid.n_per_axis >= 128 or grid.dim == 3 else 100
        for f in _fields(grid, count, 14):
            r.check("besov_s0_equals_l2", abs(sobolev_equivalence_report(f, 0.0, part).ratio - 1.0), 1e-10)
            for s in (0.5, 1.0, 2.0):
                key = (grid.dim, grid.n_per_axis, s)
                if key not in regression.BESOV_SOBOLEV_C:
                    continue
                c = regression.BESOV_SOBOLEV_C[key]
                ratio = sobolev_equivalence_report(f, s, part).ratio
                r.check(f"besov_sobolev_bracket[s={s:g}]", max(ratio, 1.0 / ratio), c)
            bound = regression.BERNSTEIN_P1.get((grid.dim, grid.n_per_axis))
            if bound is not None:
                worst = max(v for _, v in bernstein_ratio(recon, f, 1.0))
                r.check("bernstein_p1", worst, regression.BERNSTEIN_SAFETY * bound)
            dev = max(abs(v - 1.0) for _, v in bernstein_ratio(recon, f, 2.0) if v > 0)
            r.check("bernstein_p2_unity", dev, 1e-10)


def _taylor_green(level: str) -> RunConfig:
    cfg = PRESETS["taylor-green-2d"]
    return replace(cfg, n=32) if level == "quick" else cfg


def _tg_errors(cfg: RunConfig, dt: float) -> tuple[float, float]:
    res = simulate(replace(cfg, dt=dt, observers=("energy",)))
    traj = res.trajectory
    decay = math.exp(-2.0 * cfg.nu * cfg.t_end)
    init = make_initial_state(cfg.grid(), cfg.nu, "taylor-green", cfg.initial_params, np.random.default_rng(0))
    err = math.sqrt(
        cfg.grid().volume * float(np.sum(np.abs(traj.final.velocity - decay * init.velocity) ** 2))
    )
    e = traj["energy"]
    exact = e[0] * np.exp(-4.0 * cfg.nu * traj.times)
    return err, float(np.max(np.abs(e - exact) / exact))


def suite_taylor_green(level: str, r: SuiteResult, fault: str | None):
    cfg = _taylor_green(level)
    err, rel = _tg_errors(cfg, cfg.dt)
    r.check("taylor_green_velocity_error", err, 1e-8)
    r.check("taylor_green_energy_decay", rel, 1e-7)


def nonlinear_final(grid: PeriodicGrid, dt: float, t_end: float) -> np.ndarray:
    """Final coefficients of a seeded decaying random flow."""
    u_hat = random_div_free(grid, np.random.default_rng(5), rms=0.5, peak=3.0, truncation=grid.n_per_axis // 3 - 1)
    state = FlowState(grid, u_hat, 0.0, 0.02)
    return run(state, Forcing.none(), SolverConfig(dt), t_end).final.velocity


def suite_temporal_order(level: str, r: SuiteResult, fault: str | None):
    """Fourth-order convergence on a nonlinear flow."""
    grid = PeriodicGrid(2, 32)
    t_end = 0.5
    ref = nonlinear_final(grid, 0.00125, t_end)
    e1 = np.linalg.norm(nonlinear_final(grid, 0.05, t_end) - ref)
    e2 = np.linalg.norm(nonlinear_final(grid, 0.025, t_end) - ref)
    ratio = e1 / e2
    r.check("temporal_order_ratio_low", ratio, 8.0, upper=False)
    r.check("temporal_order_ratio_high", ratio, 32.0)


def suite_energy_identity(level: str, r: SuiteResult, fault: str | None):
    tg = simulate(replace(_taylor_green(level), observers=("energy", "dissipation", "forcing_power")))
    r.check("energy_identity_taylor_green", diag.energy_identity_residual(diag.energy_records(tg.trajectory)), 1e-4)
    st = simulate(replace(PRESETS["stokes-mode"], observers=("energy", "dissipation", "forcing_power")))
    r.check("energy_identity_stokes", diag.energy_identity_residual(diag.energy_records(st.trajectory)), 1e-6)
    grid = PeriodicGrid(2, 32)
    rng = np.random.default_rng(15)
    for _ in range(20):
        state = FlowState(grid, random_div_free(grid, rng, truncation=10), 0.0, 0.1)
        nl = np.stack([c.coeffs for c in nonlinear_term(state)])
        inner = abs(float(np.sum((np.conj(state.velocity) * nl).real)))
        scale = math.sqrt(float(np.sum(np.abs(state.velocity) ** 2)) * float(np.sum(np.abs(nl) ** 2)))
        r.check("nonlinear_energy_neutrality", inner / max(scale, 1e-300), 1e-10)


def suite_shell_budget(level: str, r: SuiteResult, fault: str | None):
    grid = PeriodicGrid(2, 32)
    part = build_partition(grid, PartitionProfile(PartitionMode.ENERGY))
    if fault == "partition":
        part = _corrupt(part)
    rng = np.random.default_rng(16)
    for _ in range(10):
        state = FlowState(grid, random_div_free(grid, rng, truncation=10), 0.0, 0.1)
        total = diag.l2_norm(state) ** 2
        r.check("shell_energy_sum", abs(float(np.sum(diag.shell_energies(state, part))) - total) / total, 1e-10)
        d = 2.0 * diag.dissipation_rate(state)
        r.check("shell_dissipation_sum", abs(float(np.sum(diag.shell_dissipations(state, part))) - d) / d, 1e-8)
    if level == "quick":
        cfg = replace(PRESETS["two-shell"], n=32, initial_params={"low": 1, "high": 8, "amplitude": 1.0})
    else:
        cfg = PRESETS["two-shell"]
    res = simulate(replace(cfg, t_end=0.0))
    prof = diag.high_frequency_dominance(res.trajectory.final, res.partition)
    lo = int(cfg.initial_params["low"]).bit_length() - 1
    hi = int(cfg.initial_params["high"]).bit_length() - 1
    ratio = prof.fractions[hi] / prof.fractions[lo]
    r.check("two_shell_dissipation_ratio_low", ratio, 16.0, upper=False)
    r.check("two_shell_dissipation_ratio_high", ratio, 256.0)


GRONWALL_PRESETS = ("taylor-green-2d", "stokes-mode", "forced-single-mode", "random-div-free")


def suite_gronwall(level: str, r: SuiteResult, fault: str | None):
    for name in GRONWALL_PRESETS:
        cfg = _taylor_green(level) if name == "taylor-green-2d" else PRESETS[name]
        res = simulate(cfg)
        for key, rep in res.bounds["bounds"].items():
            if key.startswith("besov_apriori_"):
                c = rep["constant"]
                r.check(f"apriori_constant_finite[{name}]", 0.0 if math.isfinite(c) else 1.0, 0.0)
                frozen = regression.APRIORI_CONSTANT.get((name, key[len("besov_apriori_"):]))
                if frozen is not None:
                    r.check(f"apriori_constant_regression[{name}]", abs(c - frozen) / frozen, regression.APRIORI_RTOL)
            else:
                r.check(f"{key}[{name}]", 0.0 if rep["satisfied"] else 1.0, 0.0)


def _by_imag(eigs: np.ndarray) -> np.ndarray:
    # the conjugate pairs share a real part, so order on the imaginary part
    return eigs[np.argsort(eigs.imag, kind="stable")]


def suite_quaternion(level: str, r: SuiteResult, fault: str | None):
    rng = np.random.default_rng(17)
    p = rng.standard_normal((100_000, 4))
    q = rng.standard_normal((100_000, 4))
    pq = np.linalg.norm(hamilton_product(p, q), axis=1)
    prod = np.linalg.norm(p, axis=1) * np.linalg.norm(q, axis=1)
    r.check("norm_multiplicativity", float(np.max(np.abs(pq - prod) / prod)), 1e-13)
    for a in rng.standard_normal((1000, 4)):
        op = left_mult_operator(Quaternion(*a))
        lam = complex(a[0], float(np.linalg.norm(a[1:])))
        expected = _by_imag(np.array([lam, lam, lam.conjugate(), lam.conjugate()]))
        r.check("leftmult_closed_form", float(np.max(np.abs(_by_imag(spectrum(op)) - expected))), 1e-10)
        lapack = _by_imag(np.linalg.eigvals(op.matrix))
        r.check("leftmult_vs_lapack", float(np.max(np.abs(lapack - expected))), 1e-10)
    scan = BifurcationScan("mu", builtin_family("leftmult-shift"), -1.0, 1.0, 101)
    found = find_crossing(scan, 1e-8)
    r.check("crossing_count", abs(len(found) - 1), 0)
    if found:
        r.check("crossing_location", abs(found[0].mu_star), 1e-8)
        r.check("crossing_max_real_part", abs(found[0].max_real_part), 1e-7)


def suite_determinism(level: str, r: SuiteResult, fault: str | None):
    cfg = PRESETS["forced-single-mode"]
    if level == "quick":
        cfg = replace(cfg, t_end=1.0)
    a = trajectory_csv(simulate(cfg))
    b = trajectory_csv(simulate(cfg))
    r.check("byte_identical_rerun", 0.0 if a == b else 1.0, 0.0)


SUITES: dict[str, Callable] = {
    "plancherel": suite_plancherel,
    "partition": suite_partition,
    "sobolev": suite_sobolev,
    "besov-bernstein": suite_besov,
    "taylor-green": suite_taylor_green,
    "temporal-order": suite_temporal_order,
    "energy-identity": suite_energy_identity,
    "shell-budget": suite_shell_budget,
    "gronwall": suite_gronwall,
    "quaternion": suite_quaternion,
    "determinism": suite_determinism,
}


def run_suites(level: str = "default", inject_fault: str | None = None) -> list[SuiteResult]:
    if level not in LEVELS:
        raise ValueError(f"unknown verify level {level!r}; choose from {LEVELS}")
    results = []
    for name, fn in SUITES.items():
        res = SuiteResult(name)
        start = time.perf_counter()
        try:
            fn(level, res, inject_fault)
        except Exception as exc:  # a crashing suite is a failing suite
            res.errors.append(f"{type(exc).__name__}: {exc}")
        res.seconds = time.perf_counter() - start
        results.append(res)
    return results


def format_table(results: list[SuiteResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'suite':<{width}}  status  seconds  detail"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        detail = "; ".join(r.failures) if r.failures else f"{len(r.worst)} invariants"
        lines.append(f"{r.name:<{width}}  {status:<6}  {r.seconds:7.2f}  {detail}")
    total = sum(r.seconds for r in results)
    ok = sum(r.passed for r in results)
    lines.append(f"{ok}/{len(results)} suites passed in {total:.2f} s")
    return "\n".join(lines)
