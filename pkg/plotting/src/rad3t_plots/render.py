"""Render benchmark figures from the solver's CSV outputs.

Three plot kinds, all consuming only the documented CSV schemas:

* profile      -- snapshot CSVs (x, T_r, T_e, T_i, psi_*): temperatures over x
* timeseries   -- several snapshot CSVs named <case>_t<time>.csv: domain-mean
                  temperatures against time
* convergence  -- convergence CSVs (sweep, n, l2_*, order_*): log-log error
                  curves per sweep with a first-order reference slope

No science is computed here beyond the log-log slope annotation; inputs are
never modified and identical inputs render identical image bytes.
"""
from __future__ import annotations

import argparse
import csv
import re
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

TEMPERATURES = ("T_r", "T_e", "T_i")
STYLES = {"T_r": "-", "T_e": "--", "T_i": ":"}

_TIME_SUFFIX = re.compile(r"_t([0-9eE+.\-]+)\.csv$")


class PlotError(Exception):
    pass


def read_csv_columns(path: Path) -> dict[str, np.ndarray]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [row for row in reader if row]
    except (OSError, StopIteration) as exc:
        raise PlotError(f"cannot read {path}: {exc}") from exc
    columns = {}
    for i, name in enumerate(header):
        try:
            columns[name] = np.array([float(r[i]) for r in rows])
        except (ValueError, IndexError) as exc:
            raise PlotError(f"ill-formed column {name!r} in {path}: {exc}") from exc
    return columns


def _require(columns, names, path):
    missing = [n for n in names if n not in columns]
    if missing:
        raise PlotError(f"{path} lacks required columns {missing}")


def render_profile(inputs, out, labels=None):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for i, path in enumerate(inputs):
        cols = read_csv_columns(path)
        _require(cols, ("x",) + TEMPERATURES, path)
        suffix = f" [{labels[i]}]" if labels else (f" [{path.stem}]" if len(inputs) > 1 else "")
        for name in TEMPERATURES:
            ax.plot(cols["x"], cols[name], STYLES[name], label=name + suffix)
    ax.set_xlabel("x")
    ax.set_ylabel("temperature")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def _snapshot_time(path: Path) -> float:
    m = _TIME_SUFFIX.search(path.name)
    if not m:
        raise PlotError(f"{path} does not follow the <case>_t<time>.csv naming")
    return float(m.group(1))


def render_timeseries(inputs, out, labels=None):
    records = []
    for path in inputs:
        cols = read_csv_columns(path)
        _require(cols, TEMPERATURES, path)
        records.append((_snapshot_time(path),
                        [float(np.mean(cols[name])) for name in TEMPERATURES]))
    records.sort(key=lambda r: r[0])
    t = np.array([r[0] for r in records])
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for k, name in enumerate(TEMPERATURES):
        ax.plot(t, [r[1][k] for r in records], STYLES[name], marker="o",
                markersize=3, label=name)
    ax.set_xlabel("t")
    ax.set_ylabel("domain-mean temperature")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def build_convergence_figure(inputs):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    n_all = []
    for path in inputs:
        try:
            with open(path, newline="", encoding="utf-8") as fh:
                reader = csv.DictReader(fh)
                rows = list(reader)
                fields = reader.fieldnames or []
        except OSError as exc:
            raise PlotError(f"cannot read {path}: {exc}") from exc
        _require(dict.fromkeys(fields), ("sweep", "n", "l2_T_r", "l2_T_e", "l2_T_i"),
                 path)
        sweeps = sorted({r["sweep"] for r in rows})
        for sweep in sweeps:
            sel = [r for r in rows if r["sweep"] == sweep]
            n = np.array([float(r["n"]) for r in sel])
            n_all.extend(n)
            for name in TEMPERATURES:
                err = np.array([float(r[f"l2_{name}"]) for r in sel])
                order = -np.polyfit(np.log(n), np.log(err), 1)[0] if len(n) > 1 else float("nan")
                ax.loglog(n, err, STYLES[name], marker="s", markersize=3,
                          label=f"{name} {sweep} (order {order:.2f})")
    if n_all:
        n_line = np.array([min(n_all), max(n_all)])
        anchor = ax.get_ylim()[1]
        ax.loglog(n_line, anchor * (n_line[0] / n_line) * 0.5, "k-.",
                  linewidth=1.0, label="first order")
    ax.set_xlabel("cells N")
    ax.set_ylabel("l2 error")
    ax.legend(fontsize=7)
    fig.tight_layout()
    return fig


def render_convergence(inputs, out, labels=None):
    fig = build_convergence_figure(inputs)
    fig.savefig(out, dpi=150)
    plt.close(fig)


RENDERERS = {
    "profile": render_profile,
    "timeseries": render_timeseries,
    "convergence": render_convergence,
}


def render(kind, inputs, out, labels=None):
    """Dispatch one plot job; raises PlotError on bad inputs."""
    if kind not in RENDERERS:
        raise PlotError(f"unknown plot kind {kind!r}; valid: {sorted(RENDERERS)}")
    inputs = [Path(p) for p in inputs]
    for p in inputs:
        if not p.exists():
            raise PlotError(f"input CSV not found: {p}")
    if labels is not None and len(labels) != len(inputs):
        raise PlotError("--labels needs one entry per input")
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    RENDERERS[kind](inputs, out, labels)
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rad3t-plot",
        description="Render profile/timeseries/convergence figures from rad3t CSVs")
    parser.add_argument("--input", action="append", required=True,
                        help="input CSV path (repeatable)")
    parser.add_argument("--kind", required=True, choices=sorted(RENDERERS))
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--labels", help="comma-separated curve labels")
    args = parser.parse_args(argv)
    labels = args.labels.split(",") if args.labels else None
    try:
        path = render(args.kind, args.input, args.out, labels)
    except PlotError as exc:
        print(f"plot error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
