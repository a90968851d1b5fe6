import csv
import json
import math
import os

import pytest

import app
import sweep_runner
from larmor_errors import ConvergenceError


def read_csv(path):
    with open(path, newline="") as file:
        return list(csv.DictReader(file))


def test_version(capsys):
    assert app.main(["version"]) == 0
    out = capsys.readouterr().out
    assert "larmor-clock" in out and "CODATA" in out


def test_analytic_point_json(capsys):
    code = app.main(["analytic", "--natural-units", "--opacity", "2", "--e-over-v0", "0.5",
                     "--format", "json"])
    assert code == 0
    result = json.loads(capsys.readouterr().out)
    assert result['tau_y'] == pytest.approx(0.96403, abs=1e-5)
    assert result['tau_z'] == pytest.approx(1.92806, abs=1e-5)
    assert result['att_f'] == pytest.approx(5.0 * math.tanh(2.0), rel=1e-8)
    assert result['att_f'] == pytest.approx(result['att_b'] ** 2 / result['att_s'], rel=1e-8)
    assert result['fano_x'] > 0 and result['fano_y'] > 0
    assert result['speed_att_f'] == pytest.approx(2.0 / result['att_f'])


def test_analytic_point_text_in_lab_units(capsys):
    assert app.main(["analytic", "--e-over-v0", "0.5"]) == 0
    out = capsys.readouterr().out
    assert "tau_y_ms = " in out and "speed_att_f_mm_s = " in out


def test_sweep_free_traversal_time(tmp_path, capsys):
    out = str(tmp_path / "sweep.csv")
    assert app.main(["sweep", "--axis", "e", "--from", "1", "--to", "1", "--points", "1",
                     "--out", out]) == 0
    row = read_csv(out)[0]
    assert float(row['tau_c_free_ms']) == pytest.approx(0.256, rel=5e-3)
    assert row['tau_c_ms'] == ''
    assert "Wrote 1 rows" in capsys.readouterr().err


def test_sweep_reports_growth_exponent(capsys):
    assert app.main(["sweep", "--axis", "L", "--from", "5", "--to", "50", "--points", "10",
                     "--fit-exponent", "att_f", "--format", "json"]) == 0
    captured = capsys.readouterr()
    assert len(json.loads(captured.out)) == 10
    exponent = float(captured.err.strip().split()[-1])
    assert exponent == pytest.approx(2.0, abs=0.02)


def test_sweep_engine_mismatch_exits_with_configuration_code(capsys):
    assert app.main(["sweep", "--barrier", "gauss", "--engine", "analytic"]) == 2
    assert "ConfigurationError" in capsys.readouterr().err


def test_non_convergence_exit_code(monkeypatch):
    def fail(*args, **kwargs):
        raise ConvergenceError("tau_y did not converge", [1.0, 2.0])

    monkeypatch.setattr(sweep_runner, "larmor_times_numeric", fail)
    assert app.main(["sweep", "--engine", "numeric", "--from", "0.5", "--to", "0.5",
                     "--points", "1"]) == 4


def test_reduce_fixture(tmp_path, fixture_csv):
    out = str(tmp_path / "att.csv")
    assert app.main(["reduce", "--input", fixture_csv, "--out", out]) == 0
    rows = read_csv(out)
    assert len(rows) == 20
    assert float(rows[6]['sigma_f_ms']) == pytest.approx(2 * 0.00262, rel=1e-6)


def test_reduce_with_monte_carlo(tmp_path):
    source = tmp_path / "m.csv"
    source.write_text("e_over_v0,tau_y_ms,tau_y_err_ms,tau_z_ms,tau_z_err_ms\n"
                      "0.5,1.0,0.01,1.0,0.01\n0.6,0.0,0.01,0.5,0.01\n")
    out = str(tmp_path / "att.json")
    assert app.main(["reduce", "--input", str(source), "--out", out, "--format", "json",
                     "--monte-carlo", "50000", "--seed", "5"]) == 0
    records = json.loads(open(out).read())
    assert records[0]['sigma_f_mc_ms'] == pytest.approx(0.02, rel=0.05)
    assert records[1]['att_f_ms'] == "inf"
    assert records[1]['sigma_f_ms'] is None and records[1]['sigma_f_mc_ms'] is None
    assert records[1]['flags'] == "divergent-regime"


def test_reduce_parse_error_exit_code(tmp_path, capsys):
    source = tmp_path / "bad.csv"
    source.write_text("e_over_v0,tau_y_ms\n0.5,1.0\n")
    assert app.main(["reduce", "--input", str(source)]) == 3
    assert "line 1" in capsys.readouterr().err


def test_limits_high_barrier(tmp_path):
    out = str(tmp_path / "limits.csv")
    assert app.main(["limits", "--regime", "high", "--natural-units", "--out", out]) == 0
    row = read_csv(out)[0]
    assert row['regime'] == "high"
    assert row['att_f'] == "inf" and float(row['att_s']) == 0.0


def test_bad_environment_is_a_configuration_error(monkeypatch):
    monkeypatch.setenv("LARMOR_GRID_SEGMENTS", "many")
    assert app.main(["version"]) == 2


def test_reduce_defaults_to_bundled_fixture(monkeypatch, tmp_path, fixture_csv):
    monkeypatch.setenv("LARMOR_DATA_DIR", os.path.dirname(fixture_csv))
    out = str(tmp_path / "att.csv")
    assert app.main(["reduce", "--out", out]) == 0
    assert len(read_csv(out)) == 20


def test_missing_input_is_a_parse_error(tmp_path, capsys):
    missing = str(tmp_path / "absent.csv")
    assert app.main(["reduce", "--input", missing]) == 3
    assert "ParseError" in capsys.readouterr().err


def test_unwritable_output_is_a_configuration_error(tmp_path, fixture_csv, capsys):
    out = str(tmp_path / "no_such_dir" / "att.csv")
    assert app.main(["reduce", "--input", fixture_csv, "--out", out]) == 2
    assert "Cannot write" in capsys.readouterr().err


def test_empty_measurement_table_keeps_header(tmp_path):
    source = tmp_path / "empty.csv"
    source.write_text("e_over_v0,tau_y_ms,tau_y_err_ms,tau_z_ms,tau_z_err_ms\n")
    out = tmp_path / "att.csv"
    assert app.main(["reduce", "--input", str(source), "--out", str(out)]) == 0
    assert out.read_text().splitlines() == [
        "e_over_v0,att_f_ms,sigma_f_ms,att_b_ms,sigma_b_ms,att_s_ms,sigma_s_ms,flags"
    ]
