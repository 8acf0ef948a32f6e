"""Full splitting step (transport then macroscopic), time loop, and run driver.

The base step is first-order: one implicit transport step followed by one
implicit macroscopic step, sources evaluated at the end of the interval.  The
optional second-order variant composes implicit-midpoint sub-steps
symmetrically (macroscopic half, transport whole, macroscopic half), each sub
interval solved by the same iterations at half length and extrapolated; it
falls back to the base step whenever an extrapolated field loses positivity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .context import SolverContext, weights_for_solver
from .errors import ConfigurationError, SolverError
from .grid import MomentState, init_equilibrium
from .macro_solver import macro_step
from .micro_solver import IterationControl, micro_step

_LANDING_RTOL = 1.0e-9


@dataclass(frozen=True)
class TimeControl:
    """Step-size policy: CFL-driven unless dt_override is set; exact landings."""

    t_end: float
    cfl: float = 0.1
    dt_override: float | None = None
    snapshot_times: tuple[float, ...] = ()

    def __post_init__(self):
        if self.t_end < 0.0:
            raise ConfigurationError("t_end must be >= 0")
        if self.dt_override is None and not 0.0 < self.cfl <= 1.0:
            raise ConfigurationError("CFL number must lie in (0, 1]")
        if self.dt_override is not None and self.dt_override <= 0.0:
            raise ConfigurationError("dt override must be positive")
        snaps = tuple(float(s) for s in self.snapshot_times)
        if any(s < 0.0 or s > self.t_end for s in snaps):
            raise ConfigurationError("snapshot times must lie within [0, t_end]")
        if list(snaps) != sorted(snaps):
            raise ConfigurationError("snapshot times must be sorted")


def cfl_dt(cfl: float, dx: float, c: float) -> float:
    """Nominal step dt = C dx / c."""
    if cfl <= 0.0 or dx <= 0.0 or c <= 0.0:
        raise ConfigurationError("cfl_dt needs positive arguments")
    return cfl * dx / c


@dataclass
class RunResult:
    """Snapshots plus the per-step series (t, dt, micro_iters, macro_iters, E_total)."""

    snapshots: list
    series: np.ndarray
    fallbacks: int = 0


def advance(ctx: SolverContext, state: MomentState, dt: float,
            micro_control: IterationControl, macro_control: IterationControl,
            t_source: float | None = None) -> MomentState:
    """One first-order split step; sources held at t_source (end of step)."""
    if t_source is None:
        t_source = state.t + dt
    mid, _ = micro_step(ctx, state, dt, micro_control)
    out, _ = macro_step(ctx, mid, dt, macro_control, t_source)
    out.t = state.t + dt
    return out


def _extrapolate(half: MomentState, base: MomentState) -> MomentState:
    return MomentState(psi=2.0 * half.psi - base.psi,
                       T_e=2.0 * half.T_e - base.T_e,
                       T_i=2.0 * half.T_i - base.T_i,
                       t=base.t)


def _positive(state: MomentState) -> bool:
    return bool(np.all(state.T_e > 0.0) and np.all(state.T_i > 0.0)
                and np.all(state.psi[:, 0] > 0.0))


def midpoint_advance(ctx: SolverContext, state: MomentState, dt: float,
                     micro_control: IterationControl,
                     macro_control: IterationControl) -> tuple[MomentState, bool]:
    """Symmetric composition of implicit-midpoint sub-steps; second order.

    Each sub-step solves its subsystem over half its interval with the usual
    iterations and extrapolates.  Returns (state, fell_back): on any loss of
    positivity the whole step reruns with the first-order scheme.
    """
    t0 = state.t
    try:
        s = macro_step(ctx, state, 0.25 * dt, macro_control, t0 + 0.25 * dt)[0]
        s = _extrapolate(s, state)
        if not _positive(s):
            raise SolverError("extrapolation lost positivity")
        m = micro_step(ctx, s, 0.5 * dt, micro_control)[0]
        m = _extrapolate(m, s)
        if not _positive(m):
            raise SolverError("extrapolation lost positivity")
        e = macro_step(ctx, m, 0.25 * dt, macro_control, t0 + 0.75 * dt)[0]
        e = _extrapolate(e, m)
        if not _positive(e):
            raise SolverError("extrapolation lost positivity")
    except SolverError:
        out = advance(ctx, state, dt, micro_control, macro_control)
        return out, True
    e.t = t0 + dt
    return e, False


# ---------------------------------------------------------------------------
# steppers
# ---------------------------------------------------------------------------

class _PnStepper:
    """Moment-method stepper (conservative or naive splitting)."""

    def __init__(self, config):
        micro_w, macro_w = weights_for_solver(config.solver)
        self.ctx = SolverContext(
            grid=config.grid, params=config.params, bc=config.bc,
            reconstruction=config.reconstruction,
            micro_weights=micro_w, macro_weights=macro_w,
            sources=tuple(config.sources),
        )
        self.state = init_equilibrium(config.grid, config.initial.profile(),
                                      config.params, config.m_order)
        self.micro_control = IterationControl(tol=config.tol, max_iters=config.max_iters)
        self.macro_control = IterationControl(tol=config.tol, max_iters=config.max_iters)
        self.midpoint = config.time_integrator == "midpoint"
        self.fallbacks = 0

    def advance(self, dt: float):
        if self.midpoint:
            self.state, fell_back = midpoint_advance(
                self.ctx, self.state, dt, self.micro_control, self.macro_control)
            self.fallbacks += int(fell_back)
        else:
            self.state = advance(self.ctx, self.state, dt,
                                 self.micro_control, self.macro_control)
            fell_back = False
        return self.micro_control.iters_used, self.macro_control.iters_used, fell_back

    def energy(self) -> float:
        from .diagnostics import total_energy
        return total_energy(self.state, self.ctx.params, self.ctx.grid.dx)

    def snapshot(self) -> MomentState:
        return self.state.copy()


class _HomogeneousStepper:
    """Scalar fast path for uniform periodic states without conduction."""

    def __init__(self, config):
        from . import _homog
        from .physics import radiation_density

        p = config.params
        if p.K_e != 0.0 or p.K_i != 0.0 or config.bc.kind != "periodic":
            raise ConfigurationError("homogeneous fast path needs periodic BCs and no conduction")
        if config.initial.kind != "uniform":
            raise ConfigurationError("homogeneous fast path needs a uniform initial state")
        for m in (p.opacity_model, p.C_ve_model, p.C_vi_model, p.kappa_model):
            if m.spatial_table is not None:
                raise ConfigurationError("homogeneous fast path forbids spatial coefficient tables")
        self._kernel = _homog
        self.config = config
        T0 = config.initial.T
        self.rho = float(radiation_density(T0, p))
        self.T_e = float(T0)
        self.T_i = float(T0)
        self.t = 0.0
        micro_w, macro_w = weights_for_solver(config.solver)
        self._weights = (micro_w.sigma, micro_w.kappa, macro_w.sigma, macro_w.kappa)
        self._src = np.array(
            [[{"radiation": 0.0, "electron": 1.0, "ion": 2.0}[s.target],
              s.amplitude, s.t_w, s.t_c, s.rho_bar, s.exponent_sign]
             for s in config.sources], dtype=float).reshape(-1, 6)
        self.midpoint = config.time_integrator == "midpoint"
        self.fallbacks = 0

    def _run(self, dt: float, n: int, series: np.ndarray):
        p = self.config.params
        ws_mi, wk_mi, ws_ma, wk_ma = self._weights
        L = self.config.grid.x_max - self.config.grid.x_min
        rho, Te, Ti, status = self._kernel.run_segment(
            self.rho, self.T_e, self.T_i, self.t, dt, n, self.midpoint,
            L, p.epsilon, p.c, p.a, ws_mi, wk_mi, ws_ma, wk_ma,
            p.opacity_model.base, p.opacity_model.exponent,
            p.C_ve_model.base, p.C_ve_model.exponent,
            p.C_vi_model.base, p.C_vi_model.exponent,
            p.kappa_model.base, p.kappa_model.exponent,
            self._src, self.config.tol, self.config.max_iters, 1.0e-14, series)
        if status == 1:
            raise SolverError(f"homogeneous iteration did not converge near t={self.t}")
        if status == 2:
            self.fallbacks += 1
        self.rho, self.T_e, self.T_i = rho, Te, Ti
        self.t += n * dt

    def advance(self, dt: float):
        series = np.zeros((1, 3))
        before = self.fallbacks
        self._run(dt, 1, series)
        return int(series[0, 0]), int(series[0, 1]), self.fallbacks > before

    def advance_many(self, dt: float, n: int) -> np.ndarray:
        series = np.zeros((n, 3))
        self._run(dt, n, series)
        return series

    def energy(self) -> float:
        from .diagnostics import heat_capacity_energy
        p = self.config.params
        L = self.config.grid.x_max - self.config.grid.x_min
        return L * (heat_capacity_energy(p.C_ve_model, self.T_e)
                    + heat_capacity_energy(p.C_vi_model, self.T_i)
                    + 2.0 * self.rho / p.c)

    def snapshot(self) -> MomentState:
        n = self.config.grid.n
        psi = np.zeros((n, self.config.m_order + 1))
        psi[:, 0] = 2.0 * self.rho
        return MomentState(psi=psi, T_e=np.full(n, self.T_e),
                           T_i=np.full(n, self.T_i), t=self.t)


def _make_stepper(config):
    if config.solver in ("pn", "naive_split"):
        if config.homogeneous:
            return _HomogeneousStepper(config)
        return _PnStepper(config)
    if config.solver == "sn":
        from .sn_reference import SnStepper
        return SnStepper(config)
    if config.solver == "diffusion_ref":
        from .diagnostics import DiffusionStepper
        return DiffusionStepper(config)
    raise ConfigurationError(f"unknown solver kind {config.solver!r}")


def _segment_steps(span: float, dt_nom: float) -> list[float]:
    """Whole steps of dt_nom plus one truncated landing step."""
    if span <= 0.0:
        return []
    k = int(math.floor(span / dt_nom + _LANDING_RTOL))
    if k >= 1 and abs(span - k * dt_nom) <= _LANDING_RTOL * dt_nom:
        return [dt_nom] * k
    k = int(math.floor(span / dt_nom))
    return [dt_nom] * k + [span - k * dt_nom]


def run(config) -> RunResult:
    """Deterministic trajectory with snapshots at the requested times."""
    config.validate()
    dt_nom = config.time.dt_override
    if dt_nom is None:
        dt_nom = cfl_dt(config.time.cfl, config.grid.dx, config.params.c)

    stepper = _make_stepper(config)
    snapshot_set = set(config.time.snapshot_times) or {config.time.t_end}
    events = sorted(snapshot_set | {config.time.t_end})

    snapshots = []
    rows = []
    t = 0.0
    if 0.0 in snapshot_set or config.time.t_end == 0.0:
        snapshots.append((0.0, stepper.snapshot()))
    events = [e for e in events if e > 0.0]

    for ev in events:
        steps = _segment_steps(ev - t, dt_nom)
        done = 0
        while done < len(steps):
            dt = steps[done]
            n_equal = 1
            while done + n_equal < len(steps) and steps[done + n_equal] == dt:
                n_equal += 1
            if n_equal > 1 and hasattr(stepper, "advance_many"):
                series = stepper.advance_many(dt, n_equal)
                for j in range(n_equal):
                    last = done + j + 1 == len(steps)
                    row_t = ev if last else t + (done + j + 1) * dt
                    rows.append((row_t, dt, series[j, 0], series[j, 1], series[j, 2]))
                done += n_equal
            else:
                mi, ma, _ = stepper.advance(dt)
                last = done + 1 == len(steps)
                row_t = ev if last else t + (done + 1) * dt_nom
                rows.append((row_t, dt, mi, ma, stepper.energy()))
                done += 1
        t = ev
        if ev in snapshot_set:
            snap = stepper.snapshot()
            snap.t = ev
            snapshots.append((ev, snap))

    series = np.array(rows, dtype=float).reshape(-1, 5)
    return RunResult(snapshots=snapshots, series=series,
                     fallbacks=getattr(stepper, "fallbacks", 0))
