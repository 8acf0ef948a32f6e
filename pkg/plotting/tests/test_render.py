import numpy as np
import pytest

from rad3t_plots.render import PlotError, main, render


def write_profile(path, t_scale=1.0):
    x = np.linspace(0.0, 1.0, 9)
    header = "x,T_r,T_e,T_i,psi_0,psi_1"
    rows = [header]
    for xi in x:
        T = 0.5 + 0.1 * np.sin(np.pi * xi) * t_scale
        rows.append(",".join(repr(float(v)) for v in [xi, T, T * 0.9, T * 1.1, 2 * T**4, 0.0]))
    path.write_text("\n".join(rows) + "\n")


def write_convergence(path):
    rows = ["sweep,n,l2_T_r,order_T_r,l2_T_e,order_T_e,l2_T_i,order_T_i"]
    for i, n in enumerate((50, 100, 200)):
        e = 0.1 / n * 50
        order = "" if i == 0 else "1.0"
        rows.append(f"epsilon=1,{n},{e},{order},{e * 1.1},{order},{e * 0.9},{order}")
    path.write_text("\n".join(rows) + "\n")


def test_profile_render(tmp_path):
    csv = tmp_path / "case_t0.5.csv"
    write_profile(csv)
    out = render("profile", [csv], tmp_path / "profile.png")
    assert out.exists() and out.stat().st_size > 0


def test_timeseries_render(tmp_path):
    paths = []
    for t in (0.1, 0.2, 0.4):
        p = tmp_path / f"case_t{t}.csv"
        write_profile(p, t_scale=t)
        paths.append(p)
    out = render("timeseries", paths, tmp_path / "series.png")
    assert out.exists() and out.stat().st_size > 0


def test_convergence_render_cli(tmp_path, capsys):
    csv = tmp_path / "case_convergence.csv"
    write_convergence(csv)
    rc = main(["--input", str(csv), "--kind", "convergence",
               "--out", str(tmp_path / "conv.png")])
    assert rc == 0
    assert (tmp_path / "conv.png").exists()


def test_rendering_is_deterministic_and_read_only(tmp_path):
    csv = tmp_path / "case_t1.0.csv"
    write_profile(csv)
    before = csv.read_bytes()
    a = render("profile", [csv], tmp_path / "a.png")
    b = render("profile", [csv], tmp_path / "b.png")
    assert a.read_bytes() == b.read_bytes()
    assert csv.read_bytes() == before


def test_missing_input_exit_code(tmp_path, capsys):
    rc = main(["--input", str(tmp_path / "nope.csv"), "--kind", "profile",
               "--out", str(tmp_path / "x.png")])
    assert rc == 1
    assert "nope.csv" in capsys.readouterr().err


def test_malformed_csv_rejected(tmp_path):
    bad = tmp_path / "bad_t1.csv"
    bad.write_text("x,T_r,T_e,T_i\n0.0,1.0,oops,1.0\n")
    with pytest.raises(PlotError):
        render("profile", [bad], tmp_path / "x.png")


def test_unknown_kind(tmp_path):
    csv = tmp_path / "c_t1.csv"
    write_profile(csv)
    with pytest.raises(PlotError):
        render("surface", [csv], tmp_path / "x.png")


def test_convergence_plot_carries_first_order_reference(tmp_path):
    from matplotlib import pyplot as plt

    from rad3t_plots.render import build_convergence_figure

    csv = tmp_path / "case_convergence.csv"
    write_convergence(csv)
    fig = build_convergence_figure([csv])
    labels = [t.get_text() for t in fig.axes[0].get_legend().get_texts()]
    plt.close(fig)
    assert "first order" in labels
