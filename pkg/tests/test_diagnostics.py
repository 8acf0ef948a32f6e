import math

import numpy as np
import pytest

from rad3t import integrator, scenarios
from rad3t.diagnostics import (convergence_orders, convergence_table,
                               diffusion_step, heat_capacity_energy, l2_error,
                               moment_decay_report, restrict_cell_average,
                               total_energy)
from rad3t.errors import ConfigurationError
from rad3t.grid import Grid1D, MomentState, init_equilibrium, periodic
from rad3t.physics import CoefficientModel, PhysicalParams, constant_model


def test_total_energy_hand_sum():
    # E = C_ve T + C_vi T + 2 rho / c with rho = a c T^4 / 2
    params = PhysicalParams(a=1.0, c=1.0,
                            C_ve_model=constant_model(0.1),
                            C_vi_model=constant_model(0.2))
    grid = Grid1D(0.0, 1.0, 4)
    state = init_equilibrium(grid, lambda x: np.ones_like(x), params, 2)
    assert total_energy(state, params, grid.dx) == pytest.approx(
        0.1 + 0.2 + 1.0, rel=1e-14)


def test_total_energy_zero_state():
    params = PhysicalParams(a=1.0, c=1.0,
                            C_ve_model=constant_model(0.1),
                            C_vi_model=constant_model(0.2))
    state = MomentState(psi=np.zeros((4, 3)), T_e=np.zeros(4), T_i=np.zeros(4))
    assert total_energy(state, params, 0.25) == 0.0


def test_total_energy_resolution_invariance():
    params = PhysicalParams(a=2.0, c=3.0,
                            C_ve_model=constant_model(0.4),
                            C_vi_model=constant_model(0.6))
    coarse = Grid1D(0.0, 1.0, 8)
    fine = Grid1D(0.0, 1.0, 16)
    sc = init_equilibrium(coarse, lambda x: np.full_like(x, 0.8), params, 2)
    sf = init_equilibrium(fine, lambda x: np.full_like(x, 0.8), params, 2)
    assert total_energy(sc, params, coarse.dx) == pytest.approx(
        total_energy(sf, params, fine.dx), rel=1e-14)


def test_total_energy_integral_form_for_linear_heat_capacity():
    params = PhysicalParams(a=1.0, c=1.0,
                            C_ve_model=CoefficientModel(base=0.3, exponent=1.0),
                            C_vi_model=constant_model(0.2))
    grid = Grid1D(0.0, 1.0, 4)
    state = init_equilibrium(grid, lambda x: np.full_like(x, 2.0), params, 2)
    # E_e = 0.3 T^2 / 2 = 0.6; E_i = 0.4; E_r = a T^4 = 16
    assert total_energy(state, params, grid.dx) == pytest.approx(
        0.6 + 0.4 + 16.0, rel=1e-13)


def test_total_energy_matches_fsum():
    rng = np.random.default_rng(0)
    params = PhysicalParams(a=1.0, c=2.0,
                            C_ve_model=constant_model(0.1),
                            C_vi_model=constant_model(0.2))
    n = 100
    psi = np.zeros((n, 3))
    psi[:, 0] = rng.random(n)
    Te = rng.random(n) + 0.5
    Ti = rng.random(n) + 0.5
    state = MomentState(psi=psi, T_e=Te, T_i=Ti)
    dx = 1.0 / n
    expected = math.fsum(dx * (0.1 * Te[j] + 0.2 * Ti[j] + psi[j, 0] / 2.0)
                         for j in range(n))
    assert total_energy(state, params, dx) == pytest.approx(expected, rel=1e-13)


def test_restriction_and_l2():
    field = np.array([1.0, 2.0])
    reference = np.array([1.0, 1.0, 2.0, 2.0])
    assert l2_error(field, reference, 1.0) == 0.0

    field2 = np.zeros(4)
    ref2 = np.zeros(8)
    field2[1] = 1.0
    assert l2_error(field2, ref2, 1.0) == pytest.approx(np.sqrt(0.25), rel=1e-14)

    with pytest.raises(ConfigurationError):
        l2_error(np.zeros(3), np.zeros(8), 1.0)


def test_l2_error_against_analytic_sine_norm():
    # reference carries exact cell averages of sin(pi x); restriction of exact
    # fine averages gives exact coarse averages, so the norm is analytic
    L = 2.0
    n_f, n_c = 64, 16
    edges_f = np.linspace(0.0, L, n_f + 1)
    avg_f = (np.cos(np.pi * edges_f[:-1]) - np.cos(np.pi * edges_f[1:])) / (
        np.pi * (L / n_f))
    field = np.zeros(n_c)
    got = l2_error(field, avg_f, L)
    edges_c = np.linspace(0.0, L, n_c + 1)
    avg_c = (np.cos(np.pi * edges_c[:-1]) - np.cos(np.pi * edges_c[1:])) / (
        np.pi * (L / n_c))
    expected = np.sqrt((L / n_c) * np.sum(avg_c**2))
    assert got == pytest.approx(expected, rel=1e-10)


def test_restrict_cell_average_conserves_mean():
    rng = np.random.default_rng(2)
    fine = rng.random(32)
    coarse = restrict_cell_average(fine, 4)
    assert np.mean(coarse) == pytest.approx(np.mean(fine), rel=1e-14)


def test_convergence_orders_exact_first_order():
    res = [50, 100, 200, 400]
    errs = [0.08 / n * 50 for n in res]
    orders = convergence_orders(res, errs)
    assert np.allclose(orders, 1.0, atol=1e-12)
    table = convergence_table(res, {"T_r": errs})
    assert table.orders["T_r"] == pytest.approx([1.0, 1.0, 1.0])


def test_moment_decay_report_equilibrium():
    params = PhysicalParams()
    grid = Grid1D(0.0, 1.0, 4)
    state = init_equilibrium(grid, lambda x: np.ones_like(x), params, 4)
    max_abs, ratios = moment_decay_report(state)
    assert max_abs[0] > 0
    assert np.all(np.isnan(ratios[1:]))


def test_diffusion_step_uniform_invariant():
    params = PhysicalParams(a=1.0, c=1.0,
                            C_ve_model=constant_model(0.1),
                            C_vi_model=constant_model(0.2),
                            K_e=0.01, K_i=0.02,
                            opacity_model=constant_model(10.0))
    grid = Grid1D(0.0, 2.0, 16)
    T = np.full(16, 0.75)
    out, iters = diffusion_step(grid, params, periodic(), T, 1e-3)
    assert np.allclose(out, 0.75, rtol=1e-12)


def test_diffusion_step_frozen_at_large_opacity():
    params = PhysicalParams(a=1.0, c=1.0,
                            C_ve_model=constant_model(0.1),
                            C_vi_model=constant_model(0.2),
                            opacity_model=constant_model(1e14))
    grid = Grid1D(0.0, 2.0, 16)
    x = grid.centers()
    T = 0.8 + 0.1 * np.sin(np.pi * x)
    out, _ = diffusion_step(grid, params, periodic(), T, 1e-3)
    assert np.allclose(out, T, rtol=1e-10)


def test_diffusion_reference_run_dispatch():
    from rad3t.diagnostics import diffusion_reference_run

    cfg = scenarios.builtin("ap_test").with_updates(
        grid=Grid1D(0.0, 2.0, 32),
        time=integrator.TimeControl(t_end=0.01, cfl=0.1))
    res = diffusion_reference_run(cfg)
    state = res.snapshots[-1][1]
    assert np.array_equal(state.T_e, state.T_i)
    assert np.all(state.T_e > 0)
