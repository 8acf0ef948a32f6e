import numpy as np
import pytest

from rad3t.errors import ConfigurationError
from rad3t.grid import (BoundarySpec, Grid1D, extend_with_ghosts, inflow,
                        init_equilibrium, periodic)
from rad3t.physics import PhysicalParams, radiation_temperature


def make_state(n=8, order=3, seed=0):
    rng = np.random.default_rng(seed)
    grid = Grid1D(0.0, 1.0, n)
    params = PhysicalParams(a=1.0, c=1.0)
    state = init_equilibrium(grid, lambda x: 1.0 + 0.2 * np.sin(2 * np.pi * x),
                             params, order)
    state.psi[:, 1:] = 0.01 * rng.standard_normal((n, order))
    return grid, params, state


def test_grid_validation():
    with pytest.raises(ConfigurationError):
        Grid1D(0.0, 1.0, 3)
    with pytest.raises(ConfigurationError):
        Grid1D(1.0, 0.0, 8)
    grid = Grid1D(0.0, 2.0, 200)
    assert grid.dx == pytest.approx(0.01)
    centers = grid.centers()
    assert np.all(np.diff(centers) > 0)
    assert centers[0] == pytest.approx(0.005)


def test_periodic_ghosts_wrap():
    grid, params, state = make_state()
    ext = extend_with_ghosts(state, periodic(), 2, params)
    assert np.array_equal(ext.psi[0], state.psi[-2])
    assert np.array_equal(ext.psi[1], state.psi[-1])
    assert np.array_equal(ext.psi[-1], state.psi[1])
    assert np.array_equal(ext.T_e[0], state.T_e[-2])


def test_ghost_interior_untouched():
    grid, params, state = make_state()
    before = state.psi.copy()
    ext = extend_with_ghosts(state, periodic(), 2, params)
    assert np.array_equal(ext.psi[2:-2], before)
    assert np.array_equal(state.psi, before)


def test_inflow_ghost_equilibrium_value():
    params = PhysicalParams(a=0.01372, c=299.79)
    grid = Grid1D(0.0, 0.5, 4)
    state = init_equilibrium(grid, lambda x: np.full_like(x, 1e-6), params, 2)
    bc = inflow(left=(1.0, 1.0, 1.0), right=(1e-6, 1e-6, 1e-6))
    ext = extend_with_ghosts(state, bc, 1, params)
    assert ext.psi[0, 0] == pytest.approx(4.1131188, rel=1e-9)
    assert ext.psi[0, 1] == 0.0
    assert ext.T_e[0] == 1.0 and ext.T_i[0] == 1.0


def test_inflow_ghost_matches_interior_equilibrium():
    params = PhysicalParams(a=1.0, c=1.0)
    grid = Grid1D(0.0, 1.0, 4)
    state = init_equilibrium(grid, lambda x: np.full_like(x, 0.7), params, 2)
    bc = inflow(left=(0.7, 0.7, 0.7), right=(0.7, 0.7, 0.7))
    ext = extend_with_ghosts(state, bc, 1, params)
    assert np.allclose(ext.psi[0], state.psi[0], rtol=1e-15)
    assert np.allclose(ext.psi[-1], state.psi[-1], rtol=1e-15)


def test_unsupported_ghost_width():
    grid, params, state = make_state()
    with pytest.raises(ConfigurationError):
        extend_with_ghosts(state, periodic(), 3, params)


def test_boundary_spec_validation():
    with pytest.raises(ConfigurationError):
        BoundarySpec(kind="inflow", left=None, right=None)
    with pytest.raises(ConfigurationError):
        BoundarySpec(kind="inflow", left=(1.0, 0.0, 1.0), right=(1.0, 1.0, 1.0))
    with pytest.raises(ConfigurationError):
        BoundarySpec(kind="outflow")


def test_init_equilibrium_cold_uniform():
    params = PhysicalParams(a=0.01372, c=299.79)
    grid = Grid1D(0.0, 0.5, 10)
    state = init_equilibrium(grid, lambda x: np.full_like(x, 1e-6), params, 3)
    assert np.allclose(state.psi[:, 0], params.a * params.c * 1e-24, rtol=1e-14)
    assert np.all(state.psi[:, 1:] == 0.0)


def test_init_equilibrium_sine_profile():
    params = PhysicalParams(a=1.0, c=1.0)
    grid = Grid1D(0.0, 2.0, 64)
    profile = lambda x: (3.0 + np.sin(np.pi * x)) / 4.0
    state = init_equilibrium(grid, profile, params, 3)
    assert np.allclose(state.T_e, profile(grid.centers()))
    assert np.allclose(state.T_i, state.T_e)


def test_init_equilibrium_unit():
    params = PhysicalParams(a=1.0, c=1.0)
    grid = Grid1D(0.0, 1.0, 5)
    state = init_equilibrium(grid, lambda x: np.ones_like(x), params, 2)
    assert np.allclose(state.psi[:, 0], 1.0, rtol=1e-15)


def test_init_equilibrium_recovers_profile_through_radiation_temperature():
    params = PhysicalParams(a=0.01372, c=29.979)
    grid = Grid1D(0.0, 2.0, 32)
    profile = lambda x: 0.5 + 0.3 * np.cos(np.pi * x)
    state = init_equilibrium(grid, profile, params, 4)
    T_r = radiation_temperature(state.rho, params)
    assert np.allclose(T_r, profile(grid.centers()), rtol=1e-14)


def test_rho_is_half_psi0():
    grid, params, state = make_state()
    assert np.allclose(state.rho, 0.5 * state.psi[:, 0], rtol=0, atol=0)
