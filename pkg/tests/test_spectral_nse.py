import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import taylor_green_velocity
from torusflow import regression
from torusflow.config import PRESETS
from torusflow.diagnostics import energy
from torusflow.fourier_core import PeriodicGrid, PhysicalField, forward_transform
from torusflow.presets import random_div_free, shear, taylor_green
from torusflow.simulation import simulate
from torusflow.spectral_nse import (
    BlowUpError,
    CFLError,
    Dealias,
    FlowState,
    Forcing,
    SolverConfig,
    default_truncation,
    divergence,
    galerkin_mask,
    leray_project,
    leray_project_array,
    nonlinear_term,
    run,
    step,
)
from torusflow.verify import nonlinear_final

seeds = st.integers(0, 2**32 - 1)


def random_state(grid, seed, rms=1.0, nu=0.1):
    trunc = default_truncation(grid)
    u = random_div_free(grid, np.random.default_rng(seed), rms=rms, truncation=trunc)
    return FlowState(grid, u, 0.0, nu, trunc)


def raw_vector(grid, rng):
    u = np.fft.fftn(rng.standard_normal((grid.dim,) + grid.shape), axes=tuple(range(1, grid.dim + 1)), norm="forward")
    return u * ~grid.nyquist_mask


@pytest.mark.parametrize("n, expected", [(32, 10), (64, 21), (128, 42)])
def test_default_truncation(n, expected):
    assert default_truncation(PeriodicGrid(2, n)) == expected
    assert default_truncation(PeriodicGrid(2, n), Dealias.NONE) == n // 2 - 1


def test_solver_config_validation():
    for dt in (0.0, -1e-3, math.inf):
        with pytest.raises(ValueError):
            SolverConfig(dt)
    with pytest.raises(ValueError):
        SolverConfig(1e-3, scheme="euler")


@pytest.mark.parametrize("grid", [PeriodicGrid(2, 32), PeriodicGrid(3, 16)], ids=str)
def test_leray_idempotent_and_solenoidal(grid, rng):
    u = raw_vector(grid, rng)
    pu = leray_project_array(grid, u)
    np.testing.assert_allclose(leray_project_array(grid, pu), pu, atol=1e-15)
    assert np.max(np.abs(divergence(grid, pu))) <= 1e-12


def test_leray_removes_gradients(grid32, rng):
    phi = forward_transform(PhysicalField(grid32, rng.standard_normal(grid32.shape))).coeffs
    phi = phi * ~grid32.nyquist_mask
    grad = np.stack([1j * k * phi for k in grid32.wavevectors])
    assert np.max(np.abs(leray_project_array(grid32, grad))) <= 1e-15


def test_leray_keeps_mean_and_takes_components(grid32):
    u = np.zeros((2,) + grid32.shape, dtype=complex)
    u[:, 0, 0] = [1.0, -2.0]
    np.testing.assert_array_equal(leray_project_array(grid32, u), u)
    comps = leray_project(FlowState(grid32, u).components)
    np.testing.assert_array_equal(comps[1].coeffs, u[1])
    with pytest.raises(TypeError):
        leray_project(u)


def test_state_validation(grid32):
    with pytest.raises(ValueError):
        FlowState(grid32, np.zeros((3,) + grid32.shape))
    with pytest.raises(ValueError):
        FlowState.zeros(grid32, nu=0.0)
    with pytest.raises(ValueError):
        FlowState.zeros(grid32, 0.1, truncation=16)


def test_from_physical_truncates_and_projects(grid32, rng):
    comps = [PhysicalField(grid32, rng.standard_normal(grid32.shape)) for _ in range(2)]
    state = FlowState.from_physical(comps, nu=0.1)
    assert state.max_divergence_ratio() <= 1e-14
    assert np.all(state.velocity[:, ~galerkin_mask(grid32, state.truncation)] == 0)


@pytest.mark.parametrize("k", [1, 2, 5])
def test_shear_is_steady_for_advection(grid32, k):
    state = FlowState(grid32, shear(grid32, k, 1.3))
    for c in nonlinear_term(state):
        assert np.max(np.abs(c.coeffs)) <= 1e-15


def test_taylor_green_advection_is_a_gradient(grid32):
    # the projected term vanishes, which is why the flow decays like Stokes
    state = FlowState(grid32, taylor_green(grid32))
    for c in nonlinear_term(state):
        assert np.max(np.abs(c.coeffs)) <= 1e-15


def test_nonlinear_term_of_zero(grid32):
    assert all(np.all(c.coeffs == 0) for c in nonlinear_term(FlowState.zeros(grid32, 0.1)))


@given(seeds)
def test_nonlinear_energy_neutral(seed):
    state = random_state(PeriodicGrid(2, 32), seed)
    nl = np.stack([c.coeffs for c in nonlinear_term(state)])
    inner = abs(float(np.sum((np.conj(state.velocity) * nl).real)))
    scale = math.sqrt(float(np.sum(np.abs(state.velocity) ** 2) * np.sum(np.abs(nl) ** 2)))
    assert inner <= 1e-10 * scale


def test_nonlinear_energy_neutral_3d():
    state = random_state(PeriodicGrid(3, 16), 4)
    nl = np.stack([c.coeffs for c in nonlinear_term(state)])
    inner = abs(float(np.sum((np.conj(state.velocity) * nl).real)))
    assert inner <= 1e-10 * np.linalg.norm(state.velocity) * np.linalg.norm(nl)


def test_nonlinear_term_checks_cfl(grid32):
    state = FlowState(grid32, shear(grid32, 1, 100.0))
    with pytest.raises(CFLError, match="reduce dt"):
        nonlinear_term(state, SolverConfig(0.1))


def test_zero_state_stays_zero(grid32):
    s = step(FlowState.zeros(grid32, 0.1), Forcing.none(), SolverConfig(1e-2))
    assert np.all(s.velocity == 0) and s.time == pytest.approx(1e-2)


@pytest.mark.parametrize("k, nu, dt", [(1, 0.1, 1e-3), (2, 0.1, 1e-2), (7, 0.05, 5e-3)])
def test_stokes_mode_one_step(grid32, k, nu, dt):
    state = FlowState(grid32, shear(grid32, k, 1.0), 0.0, nu)
    after = step(state, Forcing.none(), SolverConfig(dt))
    np.testing.assert_allclose(after.velocity, state.velocity * math.exp(-nu * k * k * dt), atol=1e-12)


def test_each_mode_decays_exactly(grid32, rng):
    # with the advection switched off by a single shear family every mode
    # is its own Stokes solution
    u = sum(shear(grid32, k, rng.standard_normal()) for k in (1, 3, 6, 9))
    state = FlowState(grid32, u, 0.0, 0.2)
    traj = run(state, Forcing.none(), SolverConfig(1e-2), 0.5)
    decay = np.exp(-0.2 * grid32.k_squared * 0.5)
    np.testing.assert_allclose(traj.final.velocity, u * decay, atol=1e-13)


def test_taylor_green_matches_analytic(grid32):
    nu, t_end = 0.1, 0.2
    state = FlowState(grid32, taylor_green(grid32), 0.0, nu)
    final = run(state, Forcing.none(), SolverConfig(1e-3), t_end).final
    x, y = grid32.coordinates()
    ue, ve = taylor_green_velocity(x, y, t_end, nu)
    u = final.physical()
    assert max(np.max(np.abs(u[0] - ue)), np.max(np.abs(u[1] - ve))) <= 1e-12


@pytest.mark.parametrize("grid", [PeriodicGrid(2, 32), PeriodicGrid(3, 16)], ids=str)
def test_divergence_and_truncation_preserved(grid):
    state = random_state(grid, 9, rms=0.5)
    final = run(state, Forcing.none(), SolverConfig(1e-2), 0.2).final
    assert final.max_divergence_ratio() <= 1e-12
    assert np.all(final.velocity[:, ~galerkin_mask(grid, state.truncation)] == 0)


def test_inviscid_limit_conserves_energy():
    grid = PeriodicGrid(2, 64)
    state = random_state(grid, 2, nu=1e-12)
    e0 = energy(state)
    traj = run(state, Forcing.none(), SolverConfig(1e-3), 1.0, {"energy": lambda s, f: energy(s)}, 0.1)
    assert np.max(np.abs(traj["energy"] - e0)) / e0 <= 1e-6


def test_forcing_drives_the_projected_pattern(grid32):
    forcing = Forcing.steady(grid32, FlowState(grid32, shear(grid32, 1, 0.2)).components)
    s = step(FlowState.zeros(grid32, 0.1), forcing, SolverConfig(1e-2))
    # exact solution of u' = -nu k^2 u + f from rest
    expected = shear(grid32, 1, 0.2) * (1 - math.exp(-0.1 * 1e-2)) / 0.1
    np.testing.assert_allclose(s.velocity, expected, atol=1e-12)


def test_modulated_forcing(grid32):
    f = Forcing.modulated(grid32, FlowState(grid32, shear(grid32, 1, 1.0)).components, lambda t: 2.0 * t)
    np.testing.assert_allclose(f.coeffs(0.5), f.base)
    assert f.active and not Forcing.none().active and Forcing.none().coeffs(1.0) is None
    with pytest.raises(ValueError):
        Forcing("modulated", shear(grid32, 1, 1.0), grid=grid32)
    with pytest.raises(ValueError):
        Forcing("gusty")


def test_forcing_is_projected(grid32):
    grad = np.stack([1j * np.broadcast_to(k, grid32.shape) for k in grid32.wavevectors]) * np.exp(-grid32.k_squared)
    assert np.max(np.abs(Forcing("steady", grad, grid=grid32).base)) <= 1e-15


def test_cfl_violation_raises(grid32):
    state = FlowState(grid32, shear(grid32, 1, 10.0), 0.0, 0.1)
    with pytest.raises(CFLError):
        step(state, Forcing.none(), SolverConfig(0.1))


def test_blow_up_reports_time(grid32):
    u = shear(grid32, 1, 1.0)
    u[0, 1, 0] = np.nan
    state = FlowState(grid32, np.nan_to_num(u), 0.0, 0.1)
    object.__setattr__(state, "velocity", u)
    with pytest.raises(BlowUpError, match="t=0.01") as info:
        step(state, Forcing.none(), SolverConfig(1e-2))
    assert info.value.time == pytest.approx(1e-2)


def test_run_with_no_span_is_empty(grid32):
    traj = run(FlowState.zeros(grid32, 0.1), Forcing.none(), SolverConfig(1e-2), 0.0, {"e": lambda s, f: energy(s)})
    assert len(traj) == 0 and traj["e"].size == 0 and traj.steps == 0


@pytest.mark.parametrize("t_end, cadence", [(-1.0, None), (0.015, None), (0.1, 0.015)])
def test_run_rejects_misaligned_times(grid32, t_end, cadence):
    with pytest.raises(ValueError):
        run(FlowState.zeros(grid32, 0.1), Forcing.none(), SolverConfig(1e-2), t_end, cadence=cadence)


def test_run_samples_on_cadence(grid32):
    traj = run(FlowState.zeros(grid32, 0.1), Forcing.none(), SolverConfig(1e-2), 0.1, {"e": lambda s, f: 0.0}, 0.05)
    np.testing.assert_allclose(traj.times, [0.0, 0.05, 0.1], atol=1e-15)
    with pytest.raises(KeyError, match="recorded"):
        traj["missing"]


def test_run_is_deterministic():
    state = random_state(PeriodicGrid(2, 32), 3)
    a = run(state, Forcing.none(), SolverConfig(1e-2), 0.2).final.velocity
    b = run(state, Forcing.none(), SolverConfig(1e-2), 0.2).final.velocity
    np.testing.assert_array_equal(a, b)


@pytest.mark.slow
def test_forced_preset_reaches_plateau():
    res = simulate(PRESETS["forced-single-mode"])
    e = res.trajectory["energy"]
    assert e[-1] == pytest.approx(regression.FORCED_PLATEAU_ENERGY, rel=regression.FORCED_PLATEAU_RTOL)
    # the steady response to (0.2 sin y, 0) with nu = 0.1 is (2 sin y, 0)
    assert e[-1] == pytest.approx(4 * math.pi**2, rel=1e-3)
    assert np.all(np.diff(e[len(e) // 2 :]) > 0)


def test_fourth_order_on_nonlinear_flow():
    # Taylor-Green cannot show the order: its advection is a pure gradient
    # and the integrating factor is exact, so its error sits at round-off
    grid = PeriodicGrid(2, 32)
    ref = nonlinear_final(grid, 0.00125, 0.5)
    e1 = np.linalg.norm(nonlinear_final(grid, 0.05, 0.5) - ref)
    e2 = np.linalg.norm(nonlinear_final(grid, 0.025, 0.5) - ref)
    assert 8.0 <= e1 / e2 <= 32.0
