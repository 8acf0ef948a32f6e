"""Built-in benchmark configurations with exactly published parameter sets."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError
from .grid import BoundarySpec, Grid1D, inflow, periodic
from .integrator import TimeControl
from .physics import CoefficientModel, PhysicalParams, SourceSpec, constant_model

SOLVER_KINDS = ("pn", "sn", "diffusion_ref", "naive_split")

BUILTIN_NAMES = ("ap_test", "homog_1", "homog_2", "marshak_nocond", "marshak_cond")


@dataclass(frozen=True)
class InitialSpec:
    """Initial equilibrium temperature profile.

    kind 'uniform' uses the constant T; kind 'sine' uses
    (base + amp * sin(pi x)) / scale.
    """

    kind: str = "uniform"
    T: float = 1.0
    base: float = 3.0
    amp: float = 1.0
    scale: float = 4.0

    def __post_init__(self):
        if self.kind not in ("uniform", "sine"):
            raise ConfigurationError(f"unknown initial profile kind {self.kind!r}")
        if self.kind == "uniform" and self.T <= 0.0:
            raise ConfigurationError("uniform initial temperature must be positive")

    def profile(self):
        if self.kind == "uniform":
            T0 = self.T
            return lambda x: np.full_like(np.asarray(x, dtype=float), T0)
        base, amp, scale = self.base, self.amp, self.scale
        return lambda x: (base + amp * np.sin(np.pi * np.asarray(x, dtype=float))) / scale


@dataclass(frozen=True)
class OutputSpec:
    """Where and how precisely CSV artifacts are written."""

    out_dir: str = "."
    precision: int = 17

    def __post_init__(self):
        if not 1 <= self.precision <= 17:
            raise ConfigurationError("CSV precision must be between 1 and 17 significant digits")


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete description of one benchmark run."""

    name: str
    grid: Grid1D
    bc: BoundarySpec
    params: PhysicalParams
    time: TimeControl
    initial: InitialSpec
    sources: tuple[SourceSpec, ...] = ()
    m_order: int = 7
    reconstruction: str = "constant"
    solver: str = "pn"
    n_directions: int = 8
    tol: float = 1.0e-10
    max_iters: int = 200
    time_integrator: str = "backward_euler"
    homogeneous: bool = False
    output: OutputSpec = field(default_factory=OutputSpec)

    def validate(self):
        if self.solver not in SOLVER_KINDS:
            raise ConfigurationError(
                f"unknown solver {self.solver!r}; valid: {SOLVER_KINDS}")
        if self.time_integrator not in ("backward_euler", "midpoint"):
            raise ConfigurationError(f"unknown time integrator {self.time_integrator!r}")
        if self.m_order < 2:
            raise ConfigurationError("moment order must be >= 2")
        if self.n_directions < self.m_order + 1 and self.solver == "sn":
            raise ConfigurationError("ordinate count must exceed the moment order")
        if self.tol <= 0.0 or self.max_iters < 2:
            raise ConfigurationError("need tol > 0 and max_iters >= 2")
        if self.bc.kind == "inflow" and (self.bc.left is None or self.bc.right is None):
            raise ConfigurationError("inflow boundaries need temperature triples")
        if self.homogeneous:
            if self.bc.kind != "periodic" or self.initial.kind != "uniform":
                raise ConfigurationError(
                    "homogeneous runs need periodic boundaries and a uniform initial state")
            if self.params.K_e != 0.0 or self.params.K_i != 0.0:
                raise ConfigurationError("homogeneous runs must have zero conduction")
        return self

    def with_updates(self, **kwargs) -> "ScenarioConfig":
        return replace(self, **kwargs)


def _ap_test() -> ScenarioConfig:
    params = PhysicalParams(
        epsilon=1.0, c=1.0, a=1.0,
        kappa_model=constant_model(1.0),
        C_ve_model=constant_model(0.1),
        C_vi_model=constant_model(0.2),
        K_e=0.01, K_i=0.02,
        opacity_model=constant_model(10.0),
    )
    return ScenarioConfig(
        name="ap_test",
        grid=Grid1D(0.0, 2.0, 200),
        bc=periodic(),
        params=params,
        time=TimeControl(t_end=0.1, cfl=0.1),
        initial=InitialSpec(kind="sine"),
        m_order=7,
        reconstruction="constant",
    )


def _homog(problem: int) -> ScenarioConfig:
    c = 29.979
    a = 0.01372
    rho_bar = 3.0
    tau = 0.1
    if problem == 1:
        C_ve = constant_model(0.1 * rho_bar)
        kappa = constant_model(0.1 * rho_bar / (c * tau))
        sources = (SourceSpec(target="ion", amplitude=25.06628,
                              t_w=1.0, t_c=1.0, rho_bar=rho_bar),)
    else:
        C_ve = CoefficientModel(base=0.1 * rho_bar, exponent=1.0)
        kappa = CoefficientModel(base=0.01379, exponent=-0.5)
        sources = (SourceSpec(target="radiation", amplitude=25.06628,
                              t_w=1.0, t_c=1.0, rho_bar=rho_bar),)
    params = PhysicalParams(
        epsilon=1.0, c=c, a=a,
        kappa_model=kappa,
        C_ve_model=C_ve,
        C_vi_model=constant_model(0.05 * rho_bar),
        K_e=0.0, K_i=0.0,
        opacity_model=CoefficientModel(base=0.5, exponent=-2.0),
    )
    return ScenarioConfig(
        name=f"homog_{problem}",
        grid=Grid1D(0.0, 1.0, 4),
        bc=periodic(),
        params=params,
        time=TimeControl(t_end=20.0, dt_override=0.0025),
        initial=InitialSpec(kind="uniform", T=2.52487e-5),
        sources=sources,
        m_order=7,
        homogeneous=True,
    )


def _marshak(conduction: bool) -> ScenarioConfig:
    cold = 1.0e-6
    bc = inflow(left=(1.0, 1.0, 1.0), right=(cold, cold, cold))
    if conduction:
        params = PhysicalParams(
            epsilon=1.0, c=29.979, a=0.01372,
            kappa_model=constant_model(1.0),
            C_ve_model=constant_model(0.3),
            C_vi_model=constant_model(0.27),
            K_e=1.0, K_i=0.1,
            opacity_model=CoefficientModel(base=300.0, exponent=-3.0),
        )
        time = TimeControl(t_end=0.1, cfl=0.8, snapshot_times=(0.01, 0.05, 0.1))
        name = "marshak_cond"
    else:
        params = PhysicalParams(
            epsilon=1.0, c=299.79, a=0.01372,
            kappa_model=constant_model(1.0),
            C_ve_model=constant_model(0.03),
            C_vi_model=constant_model(0.27),
            K_e=0.0, K_i=0.0,
            opacity_model=CoefficientModel(base=300.0, exponent=-3.0),
        )
        time = TimeControl(t_end=0.74, cfl=0.8, snapshot_times=(0.074, 0.37, 0.74))
        name = "marshak_nocond"
    return ScenarioConfig(
        name=name,
        grid=Grid1D(0.0, 0.5, 200),
        bc=bc,
        params=params,
        time=time,
        initial=InitialSpec(kind="uniform", T=cold),
        m_order=7,
        reconstruction="linear_minmod",
    )


def builtin(name: str) -> ScenarioConfig:
    """Exactly parameterized benchmark configurations."""
    if name == "ap_test":
        return _ap_test()
    if name == "homog_1":
        return _homog(1)
    if name == "homog_2":
        return _homog(2)
    if name == "marshak_nocond":
        return _marshak(conduction=False)
    if name == "marshak_cond":
        return _marshak(conduction=True)
    raise ConfigurationError(
        f"unknown builtin scenario {name!r}; valid names: {', '.join(BUILTIN_NAMES)}")
