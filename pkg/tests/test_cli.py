"""Command-line behavior: exit codes, CSV shape, and byte stability."""

import pathlib

import pytest

from ehrelay.cli import main


def run_cli(args):
    try:
        return main(args)
    except SystemExit as exc:  # argparse usage errors
        return exc.code


def read(path):
    return pathlib.Path(path).read_bytes()


def header_and_row(path):
    lines = pathlib.Path(path).read_text().splitlines()
    assert len(lines) >= 2
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


def cell(path, column, row=0):
    header, rows = header_and_row(path)
    return rows[row][header.index(column)]


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def test_simulate_row_and_determinism(tmp_path, baseline_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    args = ["simulate", "--config", baseline_path, "--scheme", "bsir",
            "--trials", "400", "--seed", "7"]
    assert run_cli(args + ["--out", str(out1)]) == 0
    assert run_cli(args + ["--out", str(out2)]) == 0
    assert read(out1) == read(out2)
    header, rows = header_and_row(out1)
    assert rows[0][header.index("scheme")] == "bsir"
    assert float(cell(out1, "p_st_mw")) == pytest.approx(0.630957344, rel=1e-9)
    assert 0.0 <= float(cell(out1, "success_rate")) <= 1.0
    assert "freq_harvest_ok" in header


def test_simulate_worker_count_invariance(tmp_path, baseline_path):
    base = ["simulate", "--config", baseline_path, "--scheme", "bcc",
            "--trials", "300", "--seed", "3"]
    one = tmp_path / "w1.csv"
    many = tmp_path / "w8.csv"
    assert run_cli(base + ["--workers", "1", "--out", str(one)]) == 0
    assert run_cli(base + ["--workers", "8", "--out", str(many)]) == 0
    assert read(one) == read(many)


def test_simulate_missing_config(tmp_path, capsys):
    missing = str(tmp_path / "nowhere.cfg")
    assert run_cli(["simulate", "--config", missing, "--scheme", "bcc",
                    "--trials", "5"]) == 2
    assert missing in capsys.readouterr().err


def test_simulate_invalid_alpha(capsys):
    assert run_cli(["simulate", "--scheme", "bcc", "--trials", "5",
                    "--alpha", "2"]) == 2
    assert "alpha must exceed 2" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def test_analyze_baseline_bcc(tmp_path, baseline_path):
    out = tmp_path / "ana.csv"
    assert run_cli(["analyze", "--config", baseline_path, "--scheme", "bcc",
                    "--out", str(out)]) == 0
    for column in ("p_h", "psi3", "psi4", "p_succ"):
        assert 0.0 < float(cell(out, column)) <= 1.0
    assert cell(out, "omega1") == ""  # not a factor of this scheme


def test_analyze_no_primaries(tmp_path):
    out = tmp_path / "ana0.csv"
    assert run_cli(["analyze", "--scheme", "bcc", "--lambda_p", "0",
                    "--out", str(out)]) == 0
    assert float(cell(out, "p_h")) == 0.0
    assert float(cell(out, "p_succ")) == 0.0


def test_analyze_bstd_direct_has_thinning_terms(tmp_path):
    out = tmp_path / "anad.csv"
    assert run_cli(["analyze", "--scheme", "bstd", "--direct_link", "true",
                    "--out", str(out)]) == 0
    assert 0.0 < float(cell(out, "pr_n1_zero")) < 1.0
    assert 0.0 < float(cell(out, "lambda_eff"))
    assert 0.0 < float(cell(out, "p_dsucc_dir")) <= 1.0


def test_analyze_rejects_random_baseline(capsys):
    assert run_cli(["analyze", "--scheme", "random_baseline"]) == 2
    assert "random_baseline" in capsys.readouterr().err


def test_analyze_quadrature_failure_exit_code(capsys):
    # Vanishingly sparse primaries make the oscillatory inversion stall.
    assert run_cli(["analyze", "--scheme", "bcc", "--lambda_p", "1e-8"]) == 3
    assert "quadrature" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def test_sweep_rows_ordered_and_stable(tmp_path, baseline_path):
    out1 = tmp_path / "s1.csv"
    out2 = tmp_path / "s2.csv"
    args = ["sweep", "--config", baseline_path, "--param", "p_st_dbm",
            "--values=-2,0", "--schemes", "bsir,random_baseline",
            "--trials", "200", "--seed", "5"]
    assert run_cli(args + ["--out", str(out1)]) == 0
    assert run_cli(args + ["--out", str(out2)]) == 0
    assert read(out1) == read(out2)
    header, rows = header_and_row(out1)
    key = [(r[header.index("value")], r[header.index("scheme")]) for r in rows]
    assert key == [("-2", "bsir"), ("-2", "random_baseline"),
                   ("0", "bsir"), ("0", "random_baseline")]
    # analytic column present for bsir, absent for the flagged baseline pick
    assert rows[0][header.index("ana_p_succ")] != ""
    assert rows[1][header.index("ana_p_succ")] == ""


def test_sweep_aborts_on_invalid_grid_point(capsys):
    code = run_cli(["sweep", "--param", "alpha", "--values", "4,2",
                    "--schemes", "bcc", "--trials", "10"])
    assert code == 2
    err = capsys.readouterr().err
    assert "alpha=2" in err and "alpha must exceed 2" in err


def test_sweep_needs_grid(capsys):
    assert run_cli(["sweep", "--schemes", "bcc", "--trials", "10"]) == 2


def test_sweep_log_spacing(tmp_path):
    out = tmp_path / "slog.csv"
    assert run_cli(["sweep", "--param", "lambda_p", "--from", "1e-3", "--to",
                    "1e-2", "--steps", "3", "--spacing", "log", "--schemes",
                    "bcc", "--trials", "50", "--out", str(out)]) == 0
    header, rows = header_and_row(out)
    values = [float(r[header.index("value")]) for r in rows]
    assert values == pytest.approx([1e-3, 10 ** -2.5, 1e-2], rel=1e-9)


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def test_compare_degenerate_point(tmp_path, capsys):
    out = tmp_path / "cmp.csv"
    assert run_cli(["compare", "--scheme", "bsir", "--lambda_sr", "0",
                    "--trials", "50", "--seed", "2", "--out", str(out)]) == 0
    assert float(cell(out, "sim_p_succ")) == 0.0
    assert float(cell(out, "p_succ")) == 0.0
    assert float(cell(out, "gap")) == 0.0
    assert "inside 95% Wilson interval" in capsys.readouterr().err


def test_compare_grid_gap_in_ci(tmp_path, baseline_path):
    out = tmp_path / "cmpg.csv"
    assert run_cli(["compare", "--config", baseline_path, "--scheme", "bsir",
                    "--param", "p_st_dbm", "--values=-2,0", "--trials",
                    "3000", "--seed", "9", "--out", str(out)]) == 0
    header, rows = header_and_row(out)
    assert len(rows) == 2
    for row in rows:
        gap = float(row[header.index("gap")])
        sim = float(row[header.index("sim_p_succ")])
        ana = float(row[header.index("p_succ")])
        assert gap == pytest.approx(sim - ana, abs=1e-9)
        assert row[header.index("gap_in_ci")] in ("0", "1")


def test_compare_wide_ci_mostly_inside(tmp_path, baseline_path):
    out = tmp_path / "wide.csv"
    assert run_cli(["compare", "--config", baseline_path, "--scheme", "bcc",
                    "--param", "p_st_dbm", "--values=-2,0,2", "--trials", "100",
                    "--seed", "13", "--out", str(out)]) == 0
    header, rows = header_and_row(out)
    inside = sum(int(r[header.index("gap_in_ci")]) for r in rows)
    assert inside >= 2  # 100-trial intervals are wide


def test_workers_env_default(monkeypatch):
    from ehrelay.simulate import default_workers
    monkeypatch.setenv("EHRELAY_WORKERS", "5")
    assert default_workers() == 5
    monkeypatch.setenv("EHRELAY_WORKERS", "junk")
    assert default_workers() == 1
    monkeypatch.delenv("EHRELAY_WORKERS")
    assert default_workers() == 1


def test_float_format_nine_significant_digits(tmp_path):
    out = tmp_path / "fmt.csv"
    assert run_cli(["analyze", "--scheme", "bcc", "--out", str(out)]) == 0
    p_h = cell(out, "p_h")
    mantissa = p_h.replace("-", "").replace(".", "").lstrip("0")
    assert len(mantissa) <= 9
