"""Command-line entry point: run, convergence, compare, and energy-audit drivers.

Every command reads a scenario (builtin name or config file), applies the
common overrides, runs the requested solvers, and emits CSV artifacts with a
header line and locale-independent '.'-decimal floats.  Exit status is 0 iff
all requested artifacts were written.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import configfile, diagnostics, integrator, scenarios
from .errors import ConfigurationError, Rad3tError, SolverError
from .grid import Grid1D
from .physics import constant_model, radiation_temperature

OUT_DIR_ENV = "RAD3T_OUT_DIR"


def _fmt(value: float, precision: int) -> str:
    return f"{float(value):.{precision}g}"


def write_csv(path: Path, header, rows, precision: int = 17) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(
                tok if isinstance(tok, str) else _fmt(tok, precision) for tok in row
            ) + "\n")


def profile_rows(state, config):
    x = config.grid.centers()
    T_r = radiation_temperature(state.rho, config.params)
    for j in range(config.grid.n):
        yield [x[j], T_r[j], state.T_e[j], state.T_i[j], *state.psi[j]]


def write_snapshots(result, config, out_dir: Path, tag: str = "") -> list[Path]:
    paths = []
    m = result.snapshots[0][1].order if result.snapshots else config.m_order
    header = ["x", "T_r", "T_e", "T_i"] + [f"psi_{l}" for l in range(m + 1)]
    for t, state in result.snapshots:
        name = f"{config.name}{tag}_t{_fmt(t, 10)}.csv"
        path = out_dir / name
        write_csv(path, header, profile_rows(state, config), config.output.precision)
        paths.append(path)
    return paths


def write_series(result, config, out_dir: Path, tag: str = "") -> Path:
    path = out_dir / f"{config.name}{tag}_series.csv"
    header = ["t", "dt", "micro_iters", "macro_iters", "E_total"]
    write_csv(path, header, result.series, config.output.precision)
    return path


def _load_scenario(args) -> scenarios.ScenarioConfig:
    if args.config and args.builtin:
        raise ConfigurationError("give either --config or --builtin, not both")
    if args.config:
        config = configfile.parse_config(args.config)
    elif args.builtin:
        config = scenarios.builtin(args.builtin)
    else:
        raise ConfigurationError("one of --config or --builtin is required")
    return _apply_overrides(config, args)


def _apply_overrides(config, args):
    p = config.params
    if getattr(args, "epsilon", None) is not None:
        p = replace(p, epsilon=args.epsilon)
    if getattr(args, "kappa", None) is not None:
        p = replace(p, kappa_model=constant_model(args.kappa))
    config = config.with_updates(params=p)
    if getattr(args, "n", None) is not None:
        config = config.with_updates(grid=Grid1D(config.grid.x_min, config.grid.x_max, args.n))
    if getattr(args, "m_order", None) is not None:
        config = config.with_updates(m_order=args.m_order)
    time = config.time
    if getattr(args, "cfl", None) is not None:
        time = replace(time, cfl=args.cfl, dt_override=None)
    if getattr(args, "dt", None) is not None:
        time = replace(time, dt_override=args.dt)
    if getattr(args, "t_end", None) is not None:
        snaps = tuple(s for s in time.snapshot_times if s <= args.t_end)
        time = replace(time, t_end=args.t_end, snapshot_times=snaps)
    if getattr(args, "snapshots", None):
        snaps = tuple(float(tok) for tok in args.snapshots.split(",") if tok.strip())
        time = replace(time, snapshot_times=snaps)
    config = config.with_updates(time=time)
    if getattr(args, "solver", None) is not None:
        config = config.with_updates(solver=args.solver)
    if getattr(args, "reconstruction", None) is not None:
        config = config.with_updates(reconstruction=args.reconstruction)
    if getattr(args, "tol", None) is not None:
        config = config.with_updates(tol=args.tol)
    if getattr(args, "integrator", None) is not None:
        config = config.with_updates(time_integrator=args.integrator)
    out_dir = getattr(args, "out_dir", None) or os.environ.get(OUT_DIR_ENV) \
        or config.output.out_dir
    config = config.with_updates(output=replace(config.output, out_dir=str(out_dir)))
    return config.validate()


def _out_dir(config) -> Path:
    return Path(config.output.out_dir)


def cmd_run(args) -> int:
    config = _load_scenario(args)
    result = integrator.run(config)
    out = _out_dir(config)
    paths = write_snapshots(result, config, out)
    paths.append(write_series(result, config, out))
    for p in paths:
        print(p)
    return 0


def _temperature_fields(state, config):
    return {
        "T_r": np.asarray(radiation_temperature(state.rho, config.params)),
        "T_e": state.T_e,
        "T_i": state.T_i,
    }


def cmd_convergence(args) -> int:
    config = _load_scenario(args)
    resolutions = [int(tok) for tok in args.resolutions.split(",")]
    for n in resolutions:
        if args.reference_n % n:
            raise ConfigurationError(
                f"resolution {n} does not divide the reference {args.reference_n}")
    sweeps = [("epsilon", v) for v in _float_list(args.epsilons)] \
        + [("kappa", v) for v in _float_list(args.kappas)]
    if not sweeps:
        sweeps = [(None, None)]
    domain = config.grid.x_max - config.grid.x_min
    out = _out_dir(config)
    rows = []
    for param, value in sweeps:
        swept = config
        if param == "epsilon":
            swept = config.with_updates(params=replace(config.params, epsilon=value))
        elif param == "kappa":
            swept = config.with_updates(params=replace(
                config.params, kappa_model=constant_model(value)))
        ref_cfg = swept.with_updates(grid=Grid1D(config.grid.x_min, config.grid.x_max,
                                                 args.reference_n))
        ref = integrator.run(ref_cfg).snapshots[-1][1]
        ref_fields = _temperature_fields(ref, ref_cfg)
        errors = {name: [] for name in ref_fields}
        for n in resolutions:
            cfg_n = swept.with_updates(grid=Grid1D(config.grid.x_min, config.grid.x_max, n))
            state = integrator.run(cfg_n).snapshots[-1][1]
            for name, field in _temperature_fields(state, cfg_n).items():
                errors[name].append(diagnostics.l2_error(field, ref_fields[name], domain))
        orders = {name: diagnostics.convergence_orders(resolutions, errs)
                  for name, errs in errors.items()}
        label = f"{param}={_fmt(value, 6)}" if param else "base"
        for i, n in enumerate(resolutions):
            row = [label, n]
            for name in ("T_r", "T_e", "T_i"):
                row.append(errors[name][i])
                row.append(orders[name][i - 1] if 0 < i <= len(orders[name]) else "")
            rows.append(row)
    path = out / f"{config.name}_convergence.csv"
    write_csv(path, ["sweep", "n", "l2_T_r", "order_T_r", "l2_T_e", "order_T_e",
                     "l2_T_i", "order_T_i"], rows, config.output.precision)
    print(path)
    return 0


def _float_list(text):
    if not text:
        return []
    return [float(tok) for tok in text.split(",") if tok.strip()]


def cmd_compare(args) -> int:
    config = _load_scenario(args)
    solvers = [tok.strip() for tok in args.solvers.split(",")]
    if len(solvers) != 2:
        raise ConfigurationError("--solvers needs exactly two entries")
    runs = {}
    configs = {}
    for solver in solvers:
        cfg = config.with_updates(solver=solver)
        if solver == "sn" and args.sn_n is not None:
            cfg = cfg.with_updates(grid=Grid1D(config.grid.x_min, config.grid.x_max, args.sn_n))
        runs[solver] = integrator.run(cfg)
        configs[solver] = cfg
    a, b = solvers
    domain = config.grid.x_max - config.grid.x_min
    rows = []
    for (t_a, s_a), (t_b, s_b) in zip(runs[a].snapshots, runs[b].snapshots):
        fields_a = _temperature_fields(s_a, configs[a])
        fields_b = _temperature_fields(s_b, configs[b])
        row = [t_a]
        for name in ("T_r", "T_e", "T_i"):
            fa, fb = fields_a[name], fields_b[name]
            if fa.shape[0] <= fb.shape[0]:
                row.append(diagnostics.l2_error(fa, fb, domain))
            else:
                row.append(diagnostics.l2_error(fb, fa, domain))
        rows.append(row)
    out = _out_dir(config)
    path = out / f"{config.name}_compare_{a}_vs_{b}.csv"
    write_csv(path, ["t", "l2_T_r", "l2_T_e", "l2_T_i"], rows, config.output.precision)
    print(path)
    return 0


def cmd_energy_audit(args) -> int:
    config = _load_scenario(args)
    result = integrator.run(config)
    E = result.series[:, 4]
    E0 = E[0] if E.size else float("nan")
    rows = [[result.series[i, 0], E[i], abs(E[i] - E0) / abs(E0)]
            for i in range(result.series.shape[0])]
    out = _out_dir(config)
    path = out / f"{config.name}_energy.csv"
    write_csv(path, ["t", "E_total", "rel_drift"], rows, config.output.precision)
    print(path)
    return 0


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="path to a scenario config file")
    p.add_argument("--builtin", help="builtin scenario name "
                   f"({', '.join(scenarios.BUILTIN_NAMES)})")
    p.add_argument("--epsilon", type=float, help="override the scale ratio")
    p.add_argument("--kappa", type=float, help="override kappa with a constant")
    p.add_argument("--n", type=int, help="override the cell count")
    p.add_argument("--m-order", dest="m_order", type=int, help="moment expansion order")
    p.add_argument("--cfl", type=float, help="CFL number (clears any dt override)")
    p.add_argument("--dt", type=float, help="fixed time step override")
    p.add_argument("--t-end", dest="t_end", type=float, help="final time")
    p.add_argument("--snapshots", help="comma list of snapshot times")
    p.add_argument("--solver", choices=scenarios.SOLVER_KINDS, help="solver kind")
    p.add_argument("--reconstruction", choices=("constant", "linear_minmod", "weno3"))
    p.add_argument("--integrator", choices=("backward_euler", "midpoint"),
                   help="time integrator")
    p.add_argument("--tol", type=float, help="iteration stopping tolerance")
    p.add_argument("--out-dir", dest="out_dir", help=f"output directory (or ${OUT_DIR_ENV})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rad3t",
        description="Asymptotic-preserving splitting solver for the "
                    "three-temperature radiative transfer model (1D slab)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and emit snapshot/series CSVs")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_conv = sub.add_parser("convergence", help="mesh-refinement study against a fine reference")
    _add_common(p_conv)
    p_conv.add_argument("--resolutions", default="50,100,200,400,800",
                        help="comma list of cell counts")
    p_conv.add_argument("--reference-n", dest="reference_n", type=int, default=1600)
    p_conv.add_argument("--epsilons", help="comma list of epsilon values to sweep")
    p_conv.add_argument("--kappas", help="comma list of kappa values to sweep")
    p_conv.set_defaults(func=cmd_convergence)

    p_cmp = sub.add_parser("compare", help="run two solvers and emit per-snapshot L2 differences")
    _add_common(p_cmp)
    p_cmp.add_argument("--solvers", default="pn,sn", help="two solver kinds, comma separated")
    p_cmp.add_argument("--sn-n", dest="sn_n", type=int,
                       help="cell count for the ordinate solver (default: same grid)")
    p_cmp.set_defaults(func=cmd_compare)

    p_en = sub.add_parser("energy-audit", help="run a scenario and emit the energy drift series")
    _add_common(p_en)
    p_en.set_defaults(func=cmd_energy_audit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    except Rad3tError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
