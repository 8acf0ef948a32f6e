import numpy as np
import pytest

from rad3t import integrator, scenarios
from rad3t.configfile import parse_config_text, serialize_config
from rad3t.errors import ConfigurationError


def test_builtin_names_resolve():
    for name in scenarios.BUILTIN_NAMES:
        cfg = scenarios.builtin(name)
        cfg.validate()
    with pytest.raises(ConfigurationError):
        scenarios.builtin("no_such_case")


def test_marshak_parameters():
    cfg = scenarios.builtin("marshak_nocond")
    assert cfg.params.c == 299.79
    assert cfg.params.a == 0.01372
    assert cfg.params.C_ve_model.base == 0.03
    assert cfg.params.C_vi_model.base == 0.27
    assert cfg.params.opacity_model.base == 300.0
    assert cfg.params.opacity_model.exponent == -3.0
    assert cfg.grid.n == 200 and cfg.m_order == 7
    assert cfg.bc.left == (1.0, 1.0, 1.0)
    assert cfg.time.snapshot_times == (0.074, 0.37, 0.74)

    cond = scenarios.builtin("marshak_cond")
    assert cond.params.c == 29.979
    assert cond.params.K_e == 1.0 and cond.params.K_i == 0.1
    assert cond.params.C_ve_model.base == 0.3


def test_homog_parameters():
    cfg = scenarios.builtin("homog_1")
    assert cfg.params.kappa_model.base == pytest.approx(0.3 / (29.979 * 0.1))
    assert cfg.params.C_ve_model.base == pytest.approx(0.3)
    assert cfg.params.C_vi_model.base == pytest.approx(0.15)
    assert cfg.params.opacity_model.base == 0.5
    assert cfg.params.opacity_model.exponent == -2.0
    assert cfg.time.dt_override == 0.0025
    assert cfg.initial.T == 2.52487e-5
    assert cfg.sources[0].target == "ion"
    assert cfg.sources[0].amplitude == 25.06628

    cfg2 = scenarios.builtin("homog_2")
    assert cfg2.sources[0].target == "radiation"
    assert cfg2.params.C_ve_model.exponent == 1.0
    assert cfg2.params.kappa_model.base == 0.01379
    assert cfg2.params.kappa_model.exponent == -0.5


def test_ap_initial_profile_value():
    cfg = scenarios.builtin("ap_test")
    profile = cfg.initial.profile()
    assert profile(np.array([0.5]))[0] == pytest.approx(1.0, rel=1e-15)
    assert cfg.params.K_e == 0.01 and cfg.params.K_i == 0.02


@pytest.mark.parametrize("name", scenarios.BUILTIN_NAMES)
def test_every_builtin_runs_one_step(name):
    cfg = scenarios.builtin(name)
    dt = cfg.time.dt_override
    if dt is None:
        dt = integrator.cfl_dt(cfg.time.cfl, cfg.grid.dx, cfg.params.c)
    cfg = cfg.with_updates(time=integrator.TimeControl(
        t_end=dt, dt_override=cfg.time.dt_override, cfl=cfg.time.cfl))
    res = integrator.run(cfg)
    assert res.series.shape[0] == 1
    state = res.snapshots[-1][1]
    assert np.all(np.isfinite(state.T_e))


@pytest.mark.parametrize("name", scenarios.BUILTIN_NAMES)
def test_builtin_round_trips_through_config_format(name):
    cfg = scenarios.builtin(name)
    text = serialize_config(cfg)
    back = parse_config_text(text)
    assert back == cfg


def test_validation_rejects_bad_combinations():
    cfg = scenarios.builtin("ap_test")
    with pytest.raises(ConfigurationError):
        cfg.with_updates(solver="magic").validate()
    with pytest.raises(ConfigurationError):
        cfg.with_updates(homogeneous=True).validate()  # sine initial state
    with pytest.raises(ConfigurationError):
        cfg.with_updates(m_order=1).validate()
