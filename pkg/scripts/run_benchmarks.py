#!/usr/bin/env python3
"""Reproduce the benchmark artifact set (CSV tables and, optionally, figures).

Runs the built-in scenarios through the CLI drivers:

  * mesh-convergence tables for the periodic relaxation test, sweeping the
    scale ratio and the coupling coefficient
  * the two homogeneous source problems (temperature histories)
  * both Marshak waves with snapshot profiles, plus the moment-vs-ordinate
    comparison table for the conduction case
  * an energy audit of the periodic test

With --plots (needs the rad3t-plots package) the matching figures are
rendered next to the CSVs.  The full set takes tens of minutes; --quick
shrinks grids and horizons for a smoke run.
"""
from __future__ import annotations

import argparse
import subprocess
import sys
from pathlib import Path


def cli(*args):
    cmd = [sys.executable, "-m", "rad3t.cli", *map(str, args)]
    print("+", " ".join(cmd[2:]), flush=True)
    res = subprocess.run(cmd)
    if res.returncode:
        raise SystemExit(f"command failed with status {res.returncode}")


def plot(kind, inputs, out):
    cmd = [sys.executable, "-m", "rad3t_plots.render", "--kind", kind,
           "--out", str(out)]
    for p in inputs:
        cmd += ["--input", str(p)]
    print("+", " ".join(cmd[2:]), flush=True)
    subprocess.run(cmd, check=True)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="benchmark_out")
    ap.add_argument("--quick", action="store_true",
                    help="small grids / short horizons for a smoke run")
    ap.add_argument("--plots", action="store_true",
                    help="render figures with rad3t-plots after each run")
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    if args.quick:
        resolutions, ref_n = "25,50,100", 200
        homog_t, marshak_args = "2.0", ["--t-end", "0.01", "--snapshots", "0.005,0.01"]
        sn_n = 400
    else:
        resolutions, ref_n = "50,100,200,400,800", 1600
        homog_t, marshak_args = "20.0", []
        sn_n = 1600

    conv = out / "convergence"
    cli("convergence", "--builtin", "ap_test", "--resolutions", resolutions,
        "--reference-n", ref_n, "--epsilons", "1.0,0.1,0.001",
        "--out-dir", conv)
    cli("convergence", "--builtin", "ap_test", "--resolutions", resolutions,
        "--reference-n", ref_n, "--kappas", "10,100", "--out-dir", conv)

    cli("energy-audit", "--builtin", "ap_test", "--out-dir", out / "energy")

    for problem in ("homog_1", "homog_2"):
        times = ",".join(str(round(0.25 * k * float(homog_t), 6))
                         for k in range(1, 5))
        cli("run", "--builtin", problem, "--t-end", homog_t,
            "--snapshots", times, "--out-dir", out / problem)

    for case in ("marshak_nocond", "marshak_cond"):
        if case == "marshak_nocond" and not args.quick:
            # the long horizon at c = 299.79 is the expensive run of the set
            cli("run", "--builtin", case, "--out-dir", out / case)
        else:
            cli("run", "--builtin", case, *marshak_args, "--out-dir", out / case)

    cmp_dir = out / "compare"
    cli("compare", "--builtin", "marshak_cond", "--solvers", "pn,sn",
        "--sn-n", sn_n, *marshak_args, "--out-dir", cmp_dir)

    if args.plots:
        for table in conv.glob("*_convergence.csv"):
            plot("convergence", [table], table.with_suffix(".png"))
        for case in ("homog_1", "homog_2"):
            snaps = sorted((out / case).glob(f"{case}_t*.csv"))
            if snaps:
                plot("timeseries", snaps, out / case / f"{case}_history.png")
        for case in ("marshak_nocond", "marshak_cond"):
            for snap in sorted((out / case).glob(f"{case}_t*.csv")):
                plot("profile", [snap], snap.with_suffix(".png"))

    print(f"artifacts under {out}/")


if __name__ == "__main__":
    main()
