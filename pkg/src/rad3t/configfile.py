"""Flat sectioned key-value config format for scenario descriptions.

Sections mirror the scenario fields; unknown sections or keys are errors so
benchmark parameter typos cannot pass silently.  Every builtin scenario
round-trips through this format bit-exactly.
"""
from __future__ import annotations

import configparser
import io

from .errors import ConfigurationError
from .grid import BoundarySpec, Grid1D
from .integrator import TimeControl
from .physics import CoefficientModel, PhysicalParams, SourceSpec
from .scenarios import InitialSpec, OutputSpec, ScenarioConfig

_MODEL_SECTIONS = {
    "opacity": "opacity_model",
    "kappa": "kappa_model",
    "c_ve": "C_ve_model",
    "c_vi": "C_vi_model",
}

_KNOWN_KEYS = {
    "scenario": {"name", "solver", "m_order", "reconstruction", "n_directions",
                 "tol", "max_iters", "time_integrator", "homogeneous"},
    "grid": {"x_min", "x_max", "n"},
    "time": {"t_end", "cfl", "dt", "snapshots"},
    "boundary": {"kind", "left_t_e", "left_t_i", "left_t_r",
                 "right_t_e", "right_t_i", "right_t_r"},
    "params": {"epsilon", "c", "a", "k_e", "k_i"},
    "opacity": {"base", "exponent"},
    "kappa": {"base", "exponent"},
    "c_ve": {"base", "exponent"},
    "c_vi": {"base", "exponent"},
    "initial": {"kind", "t", "base", "amp", "scale"},
    "source": {"target", "amplitude", "t_w", "t_c", "rho_bar", "exponent_sign"},
    "output": {"out_dir", "precision"},
}


def _fmt(value: float) -> str:
    return repr(float(value))


def serialize_config(config: ScenarioConfig) -> str:
    """Render a scenario to the sectioned text format."""
    cp = configparser.ConfigParser()
    cp["scenario"] = {
        "name": config.name,
        "solver": config.solver,
        "m_order": str(config.m_order),
        "reconstruction": config.reconstruction,
        "n_directions": str(config.n_directions),
        "tol": _fmt(config.tol),
        "max_iters": str(config.max_iters),
        "time_integrator": config.time_integrator,
        "homogeneous": str(config.homogeneous).lower(),
    }
    cp["grid"] = {"x_min": _fmt(config.grid.x_min), "x_max": _fmt(config.grid.x_max),
                  "n": str(config.grid.n)}
    time_sec = {"t_end": _fmt(config.time.t_end), "cfl": _fmt(config.time.cfl)}
    if config.time.dt_override is not None:
        time_sec["dt"] = _fmt(config.time.dt_override)
    if config.time.snapshot_times:
        time_sec["snapshots"] = ",".join(_fmt(s) for s in config.time.snapshot_times)
    cp["time"] = time_sec
    bc = {"kind": config.bc.kind}
    if config.bc.kind == "inflow":
        for side, vals in (("left", config.bc.left), ("right", config.bc.right)):
            bc[f"{side}_t_e"], bc[f"{side}_t_i"], bc[f"{side}_t_r"] = map(_fmt, vals)
    cp["boundary"] = bc
    p = config.params
    cp["params"] = {"epsilon": _fmt(p.epsilon), "c": _fmt(p.c), "a": _fmt(p.a),
                    "k_e": _fmt(p.K_e), "k_i": _fmt(p.K_i)}
    for section, attr in _MODEL_SECTIONS.items():
        model: CoefficientModel = getattr(p, attr)
        if model.spatial_table is not None:
            raise ConfigurationError("spatial coefficient tables are not serializable")
        cp[section] = {"base": _fmt(model.base), "exponent": _fmt(model.exponent)}
    init = {"kind": config.initial.kind}
    if config.initial.kind == "uniform":
        init["t"] = _fmt(config.initial.T)
    else:
        init.update(base=_fmt(config.initial.base), amp=_fmt(config.initial.amp),
                    scale=_fmt(config.initial.scale))
    cp["initial"] = init
    if config.sources:
        if len(config.sources) > 1:
            raise ConfigurationError("config files support at most one source")
        s = config.sources[0]
        cp["source"] = {"target": s.target, "amplitude": _fmt(s.amplitude),
                        "t_w": _fmt(s.t_w), "t_c": _fmt(s.t_c),
                        "rho_bar": _fmt(s.rho_bar),
                        "exponent_sign": _fmt(s.exponent_sign)}
    cp["output"] = {"out_dir": config.output.out_dir,
                    "precision": str(config.output.precision)}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def write_config(config: ScenarioConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_config(config))


def _check_keys(cp: configparser.ConfigParser):
    for section in cp.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigurationError(f"unknown config section [{section}]")
        for key in cp[section]:
            if key not in _KNOWN_KEYS[section]:
                raise ConfigurationError(f"unknown key {key!r} in section [{section}]")


def _getfloat(cp, section, key, default=None):
    try:
        if default is None:
            return cp.getfloat(section, key)
        return cp.getfloat(section, key, fallback=default)
    except ValueError as exc:
        raise ConfigurationError(f"bad numeric value for {section}.{key}: {exc}") from exc


def parse_config_text(text: str) -> ScenarioConfig:
    cp = configparser.ConfigParser(strict=True)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"config parse error: {exc}") from exc
    _check_keys(cp)
    for required in ("scenario", "grid", "time", "boundary", "params", "initial"):
        if required not in cp:
            raise ConfigurationError(f"missing config section [{required}]")

    grid = Grid1D(x_min=_getfloat(cp, "grid", "x_min"),
                  x_max=_getfloat(cp, "grid", "x_max"),
                  n=cp.getint("grid", "n"))
    snaps = ()
    if cp.has_option("time", "snapshots"):
        snaps = tuple(float(tok) for tok in cp.get("time", "snapshots").split(",") if tok.strip())
    time = TimeControl(
        t_end=_getfloat(cp, "time", "t_end"),
        cfl=_getfloat(cp, "time", "cfl", 0.1),
        dt_override=_getfloat(cp, "time", "dt") if cp.has_option("time", "dt") else None,
        snapshot_times=snaps,
    )
    kind = cp.get("boundary", "kind")
    if kind == "periodic":
        bc = BoundarySpec(kind="periodic")
    else:
        def triple(side):
            return tuple(_getfloat(cp, "boundary", f"{side}_t_{f}") for f in ("e", "i", "r"))
        bc = BoundarySpec(kind=kind, left=triple("left"), right=triple("right"))

    def model(section):
        return CoefficientModel(base=_getfloat(cp, section, "base"),
                                exponent=_getfloat(cp, section, "exponent", 0.0))

    params = PhysicalParams(
        epsilon=_getfloat(cp, "params", "epsilon"),
        c=_getfloat(cp, "params", "c"),
        a=_getfloat(cp, "params", "a"),
        K_e=_getfloat(cp, "params", "k_e", 0.0),
        K_i=_getfloat(cp, "params", "k_i", 0.0),
        opacity_model=model("opacity"),
        kappa_model=model("kappa"),
        C_ve_model=model("c_ve"),
        C_vi_model=model("c_vi"),
    )
    init_kind = cp.get("initial", "kind")
    if init_kind == "uniform":
        initial = InitialSpec(kind="uniform", T=_getfloat(cp, "initial", "t"))
    else:
        initial = InitialSpec(kind=init_kind,
                              base=_getfloat(cp, "initial", "base", 3.0),
                              amp=_getfloat(cp, "initial", "amp", 1.0),
                              scale=_getfloat(cp, "initial", "scale", 4.0))
    sources = ()
    if "source" in cp:
        sources = (SourceSpec(
            target=cp.get("source", "target"),
            amplitude=_getfloat(cp, "source", "amplitude"),
            t_w=_getfloat(cp, "source", "t_w", 1.0),
            t_c=_getfloat(cp, "source", "t_c", 1.0),
            rho_bar=_getfloat(cp, "source", "rho_bar", 1.0),
            exponent_sign=_getfloat(cp, "source", "exponent_sign", -1.0),
        ),)
    output = OutputSpec(out_dir=cp.get("output", "out_dir", fallback="."),
                        precision=cp.getint("output", "precision", fallback=17))

    config = ScenarioConfig(
        name=cp.get("scenario", "name"),
        grid=grid, bc=bc, params=params, time=time, initial=initial,
        sources=sources,
        m_order=cp.getint("scenario", "m_order", fallback=7),
        reconstruction=cp.get("scenario", "reconstruction", fallback="constant"),
        solver=cp.get("scenario", "solver", fallback="pn"),
        n_directions=cp.getint("scenario", "n_directions", fallback=8),
        tol=_getfloat(cp, "scenario", "tol", 1.0e-10),
        max_iters=cp.getint("scenario", "max_iters", fallback=200),
        time_integrator=cp.get("scenario", "time_integrator", fallback="backward_euler"),
        homogeneous=cp.getboolean("scenario", "homogeneous", fallback=False),
        output=output,
    )
    return config.validate()


def parse_config(path) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
