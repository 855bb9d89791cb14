"""End-to-end tests of the command-line front end, run in process."""

import math

import numpy as np
import pytest

from oblique_stab.cli import main


def _lines(path):
    return path.read_text().splitlines()


def _data_rows(path):
    return [ln for ln in _lines(path) if ln and not ln.startswith("#")]


# ---------------------------------------------------------------- eigs

def test_eigs_sweep_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    rc = main([
        "eigs", "--bc", "dirichlet", "--scheme", "mxe",
        "--M", "2..6", "--r", "0.5", "--output", str(out),
    ])
    assert rc == 0
    rows = _data_rows(out)
    assert rows[0] == "M,r,vartheta_numeric,vartheta_analytic,op_norm,vartheta_limit,max_offdiag_theta"
    body = [r.split(",") for r in rows[1:]]
    assert [int(r[0]) for r in body] == [2, 3, 4, 5, 6]
    first = body[0]
    # closed form at M=2, r=0.5 appears in both numeric and analytic columns
    exact = 16.0 / (0.5 * math.pi**2) * math.sin(math.pi / 8) ** 2
    assert float(first[2]) == pytest.approx(exact, rel=1e-12)
    assert float(first[3]) == pytest.approx(exact, rel=1e-12)
    assert float(first[4]) == pytest.approx(1.0 / math.sqrt(exact), rel=1e-12)


def test_eigs_neumann_uni_blank_analytic_column(tmp_path):
    out = tmp_path / "n.csv"
    assert main([
        "eigs", "--bc", "neumann", "--scheme", "uni",
        "--M", "3..5", "--r", "0.2", "--output", str(out),
    ]) == 0
    for row in _data_rows(out)[1:]:
        assert row.split(",")[3] == ""


def test_eigs_slope_footer(tmp_path):
    out = tmp_path / "slope.csv"
    assert main([
        "eigs", "--bc", "neumann", "--scheme", "uni",
        "--M", "10..20", "--r", "0.2", "--output", str(out),
    ]) == 0
    slope_lines = [ln for ln in _lines(out) if ln.startswith("# slope")]
    assert len(slope_lines) == 1
    assert "M[10,20]" in slope_lines[0]
    slope = float(slope_lines[0].split(":")[1])
    assert slope == pytest.approx(-1e-3, rel=0.15)


def test_eigs_deterministic_and_jobs_independent(tmp_path):
    args = ["eigs", "--M", "2..12", "--r", "0.25,0.5", "--bc", "neumann"]
    out = tmp_path / "a.csv"
    assert main(args + ["--output", str(out)]) == 0
    first = out.read_bytes()
    assert main(args + ["--output", str(out)]) == 0
    assert out.read_bytes() == first  # identical invocation, identical bytes
    # worker count must not change any computed row
    par = tmp_path / "b.csv"
    assert main(args + ["--jobs", "4", "--output", str(par)]) == 0
    assert _data_rows(par) == _data_rows(out)


def test_norm_alias(tmp_path):
    out = tmp_path / "norm.csv"
    assert main(["norm", "--M", "3", "--r", "0.5", "--output", str(out)]) == 0
    assert len(_data_rows(out)) == 2


def test_eigs_custom_centers(tmp_path):
    out = tmp_path / "c.csv"
    assert main([
        "eigs", "--scheme", "custom", "--centers", "0.8,1.6,2.4",
        "--M", "3", "--r", "0.2", "--output", str(out),
    ]) == 0
    assert len(_data_rows(out)) == 2


# ---------------------------------------------------------------- project

def test_project_constant_input(tmp_path):
    src = tmp_path / "input.csv"
    xs = np.linspace(0.0, math.pi, 201)
    src.write_text("\n".join(f"{x:.17g},2.0" for x in xs) + "\n")
    out = tmp_path / "proj.csv"
    rc = main([
        "project", "--bc", "dirichlet", "--M", "4", "--r", "0.1",
        "--input", str(src), "--output", str(out),
    ])
    assert rc == 0
    text = _lines(out)
    resid = {ln.split(":")[0].strip("# ") for ln in text if ln.startswith("#")}
    orth = next(ln for ln in text if ln.startswith("# orthogonal_residual_l2"))
    obli = next(ln for ln in text if ln.startswith("# oblique_residual_l2"))
    orth_val = float(orth.split(":")[1])
    obli_val = float(obli.split(":")[1])
    # the orthogonal projection leaves exactly the mass outside the supports
    assert orth_val == pytest.approx(2.0 * math.sqrt(0.9 * math.pi), rel=1e-9)
    assert obli_val >= orth_val
    header = next(ln for ln in text if not ln.startswith("#"))
    assert header == "x,input,oblique,orthogonal"
    assert len(_data_rows(out)) == 1 + len(xs)


def test_project_rejects_m_range(tmp_path):
    src = tmp_path / "input.csv"
    src.write_text("0.0,1.0\n3.0,1.0\n")
    assert main(["project", "--M", "2..4", "--r", "0.1", "--input", str(src)]) == 2


def test_project_rejects_samples_outside_domain(tmp_path):
    src = tmp_path / "input.csv"
    src.write_text("0.0,1.0\n9.0,1.0\n")
    assert main(["project", "--M", "2", "--r", "0.1", "--input", str(src)]) == 2


# ---------------------------------------------------------------- simulate

def test_simulate_small_run(tmp_path):
    out = tmp_path / "run.csv"
    rc = main([
        "simulate", "--bc", "dirichlet", "--M", "6", "--r", "0.1",
        "--N", "201", "--k", "2e-3", "--T", "0.2", "--output", str(out),
    ])
    assert rc == 0
    rows = _data_rows(out)
    assert rows[0] == "t,l2_norm,feedback_on"
    body = [r.split(",") for r in rows[1:]]
    assert len(body) == int(0.2 / 2e-3) + 1
    assert float(body[0][0]) == 0.0
    assert all(r[2] == "1" for r in body)
    norms = [float(r[1]) for r in body]
    assert norms[-1] < norms[0]


def test_simulate_feedback_off(tmp_path):
    out = tmp_path / "free.csv"
    rc = main([
        "simulate", "--feed-on", "off", "--N", "201", "--k", "2e-3",
        "--T", "0.2", "--output", str(out),
    ])
    assert rc == 0
    body = [r.split(",") for r in _data_rows(out)[1:]]
    assert all(r[2] == "0" for r in body)
    norms = [float(r[1]) for r in body]
    assert norms[-1] > norms[0]  # unstable reaction, no feedback


def test_simulate_feed_on_window(tmp_path):
    out = tmp_path / "win.csv"
    rc = main([
        "simulate", "--feed-on", "0:0.1", "--N", "201", "--k", "2e-3",
        "--T", "0.2", "--output", str(out),
    ])
    assert rc == 0
    body = [r.split(",") for r in _data_rows(out)[1:]]
    flags = [r[2] for r in body]
    assert flags[0] == "1"
    assert flags[-1] == "0"
    assert "0" in flags and "1" in flags


def test_simulate_snapshots(tmp_path):
    out = tmp_path / "run.csv"
    rc = main([
        "simulate", "--N", "101", "--k", "2e-3", "--T", "0.1",
        "--snapshot-times", "0,0.05,0.1", "--output", str(out),
    ])
    assert rc == 0
    snap = tmp_path / "run_snapshots.csv"
    assert snap.exists()
    rows = _data_rows(snap)
    assert rows[0].startswith("x,t=0")
    assert rows[0].count(",") == 3
    assert len(rows) == 1 + 101
    # first snapshot is the initial profile 0.1*x
    first = rows[1].split(",")
    last = rows[-1].split(",")
    assert float(first[1]) == pytest.approx(0.0)
    assert float(last[1]) == pytest.approx(0.1 * math.pi, rel=1e-12)


def test_simulate_snapshots_need_output():
    assert main([
        "simulate", "--N", "101", "--k", "2e-3", "--T", "0.1",
        "--snapshot-times", "0,0.1",
    ]) == 2


def test_simulate_oscillating_reaction(tmp_path):
    out = tmp_path / "osc.csv"
    rc = main([
        "simulate", "--reaction", "oscillating", "--N", "201", "--k", "2e-3",
        "--T", "0.1", "--M", "8", "--output", str(out),
    ])
    assert rc == 0
    assert len(_data_rows(out)) == 1 + int(0.1 / 2e-3) + 1


def test_simulate_table_reaction(tmp_path):
    table = tmp_path / "table.csv"
    table.write_text(
        "x,0.0,3.141592653589793\n"
        "0.0,-3.5,-3.5\n"
        "10.0,-3.5,-3.5\n"
    )
    out = tmp_path / "tab.csv"
    rc = main([
        "simulate", "--reaction", f"table:{table}", "--N", "201",
        "--k", "2e-3", "--T", "0.1", "--output", str(out),
    ])
    assert rc == 0
    # constant table reproduces the constant reaction up to rounding in the
    # bilinear interpolation
    ref = tmp_path / "ref.csv"
    assert main([
        "simulate", "--reaction", "constant:-3.5", "--N", "201",
        "--k", "2e-3", "--T", "0.1", "--output", str(ref),
    ]) == 0
    got = [float(r.split(",")[1]) for r in _data_rows(out)[1:]]
    want = [float(r.split(",")[1]) for r in _data_rows(ref)[1:]]
    assert np.allclose(got, want, rtol=1e-12)


def test_simulate_y0_samples(tmp_path):
    y0 = tmp_path / "y0.csv"
    xs = np.linspace(0.0, math.pi, 51)
    y0.write_text("\n".join(f"{x:.17g},{0.1 * x:.17g}" for x in xs) + "\n")
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    common = ["simulate", "--N", "201", "--k", "2e-3", "--T", "0.1"]
    assert main(common + ["--y0", f"samples:{y0}", "--output", str(out_a)]) == 0
    assert main(common + ["--y0", "linear:0.1", "--output", str(out_b)]) == 0
    got = [float(r.split(",")[1]) for r in _data_rows(out_a)[1:]]
    want = [float(r.split(",")[1]) for r in _data_rows(out_b)[1:]]
    assert np.allclose(got, want, rtol=1e-12)


# ---------------------------------------------------------------- suffcond

def test_suffcond_reports_minimal_m(tmp_path):
    out = tmp_path / "s.csv"
    rc = main([
        "suffcond", "--bc", "dirichlet", "--nu", "0.1", "--r", "0.1",
        "--a-bound", "3.5", "--output", str(out),
    ])
    assert rc == 0
    kv = dict(
        ln.split("=", 1) for ln in _lines(out) if "=" in ln and not ln.startswith("#")
    )
    assert kv["swept_minimal_M"] == "75"
    assert kv["closed_form_minimal_M"] == "75"
    assert float(kv["op_norm_limit"]) == pytest.approx(
        math.sqrt(0.1) * math.pi / (2 * math.sin(0.05 * math.pi)), rel=1e-12
    )
    assert float(kv["margin"]) > 0


def test_suffcond_zero_bound_gives_first_m(tmp_path):
    out = tmp_path / "s0.csv"
    assert main([
        "suffcond", "--nu", "0.1", "--r", "0.5", "--a-bound", "0", "--output", str(out),
    ]) == 0
    kv = dict(
        ln.split("=", 1) for ln in _lines(out) if "=" in ln and not ln.startswith("#")
    )
    assert kv["swept_minimal_M"] == "1"
    assert float(kv["alpha_next"]) == pytest.approx(4.0)


def test_suffcond_unreachable_bound(tmp_path):
    out = tmp_path / "sx.csv"
    assert main([
        "suffcond", "--nu", "0.1", "--r", "0.1", "--a-bound", "100",
        "--max-M", "5", "--output", str(out),
    ]) == 0
    assert "swept_minimal_M=-1" in _lines(out)


def test_suffcond_requires_a_bound():
    assert main(["suffcond", "--nu", "0.1", "--r", "0.1"]) == 2


# ---------------------------------------------------------------- config file

def test_config_file_merge_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\nM=2..4\nr=0.5\nbc=neumann\n")
    out_a = tmp_path / "a.csv"
    assert main(["eigs", "--config", str(cfg), "--output", str(out_a)]) == 0
    assert len(_data_rows(out_a)) == 1 + 3
    # flags beat the config file
    out_b = tmp_path / "b.csv"
    assert main(["eigs", "--config", str(cfg), "--M", "7", "--output", str(out_b)]) == 0
    rows = _data_rows(out_b)
    assert len(rows) == 2
    assert rows[1].split(",")[0] == "7"


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("wobble=3\n")
    assert main(["eigs", "--config", str(cfg), "--M", "2", "--r", "0.5"]) == 2


def test_config_comment_records_settings(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["eigs", "--M", "3", "--r", "0.5", "--output", str(out)]) == 0
    head = _lines(out)[0]
    assert head.startswith("# config: command=eigs")
    assert "M=3" in head and "r=0.5" in head


# ---------------------------------------------------------------- failure modes

def test_invalid_argument_exits_two():
    assert main(["eigs", "--bc", "sideways", "--M", "2", "--r", "0.5"]) == 2
    assert main(["eigs", "--M", "0", "--r", "0.5"]) == 2
    assert main(["eigs", "--M", "2", "--r", "1.5"]) == 2
    assert main(["eigs", "--scheme", "uni", "--M", "2", "--r", "0.9"]) == 2
    assert main(["simulate", "--feed-on", "nonsense", "--T", "0.1"]) == 2
    assert main(["simulate", "--reaction", "sinusoid", "--T", "0.1"]) == 2


def test_centers_require_custom_scheme():
    assert main(["eigs", "--centers", "1.0", "--M", "1", "--r", "0.5"]) == 2


def test_numerical_failure_exits_three():
    # nearly coincident custom centers defeat the direct-sum split
    assert main([
        "eigs", "--scheme", "custom", "--centers", "1.0,1.00000001",
        "--M", "2", "--r", "0.2",
    ]) == 3


def test_unknown_command_exits_nonzero():
    assert main(["frobnicate"]) == 2
