"""Command-line interface: argument validation, output formats, exit
codes, the dump/ingest round trip, parallel sweeps, and figure output."""

import json
import subprocess
import sys

import numpy as np
import pytest

from g2calc import catalog, serialize
from g2calc.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ------------------------------------------------------------- validation

def test_requires_exactly_one_input_source(capsys):
    code, _, err = run_cli(capsys, "classify")
    assert code == EXIT_VALIDATION
    assert "exactly one input source" in err
    code, _, err = run_cli(capsys, "classify", "--catalog", "flat",
                           "--input", "x.json")
    assert code == EXIT_VALIDATION


def test_unknown_catalog_name(capsys):
    code, _, err = run_cli(capsys, "classify", "--catalog", "nope")
    assert code == EXIT_VALIDATION
    assert "unknown catalog entry" in err


def test_unknown_parameter(capsys):
    code, _, err = run_cli(capsys, "classify", "--catalog", "flat",
                           "--param", "q=2")
    assert code == EXIT_VALIDATION
    assert "does not take parameters" in err


def test_malformed_param(capsys):
    code, _, err = run_cli(capsys, "classify", "--catalog", "htype",
                           "--param", "a=abc")
    assert code == EXIT_VALIDATION
    assert "must be numbers" in err


def test_malformed_json_reports_location(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"coframe": oops}\n')
    code, _, err = run_cli(capsys, "classify", "--input", str(bad))
    assert code == EXIT_VALIDATION
    assert "line 1" in err and "column" in err


def test_missing_input_file(capsys):
    code, _, err = run_cli(capsys, "classify", "--input", "/no/such.json")
    assert code == EXIT_VALIDATION


def test_ranges_rejected_outside_sweep(capsys):
    code, _, err = run_cli(capsys, "classify", "--catalog", "htype",
                           "--param", "a=1:2:0.5")
    assert code == EXIT_VALIDATION
    assert "only valid" in err


def test_numerical_failure_exit_code(tmp_path, capsys):
    record = catalog.build("htype", a=1.0)
    document = serialize.structure_to_dict(record.structure, record.lie,
                                           "broken", {})
    document["phi"] = [t for t in document["phi"]] + [
        {"indices": [1, 2, 3], "coeff": 0.4}]
    path = tmp_path / "broken.json"
    path.write_text(serialize.dumps_json(document))
    code, _, err = run_cli(capsys, "classify", "--input", str(path))
    assert code == EXIT_NUMERICAL
    assert "numerical failure" in err


def test_soliton_requires_brackets(capsys):
    code, _, err = run_cli(capsys, "soliton", "--catalog",
                           "bryant-homogeneous")
    assert code == EXIT_VALIDATION
    assert "Lie brackets" in err


def test_argparse_error_maps_to_validation(capsys):
    assert main(["flow", "--catalog", "flat", "--dt", "x"]) == \
        EXIT_VALIDATION


# ------------------------------------------------------------ happy paths

def test_classify_table_shows_headline_numbers(capsys):
    code, out, _ = run_cli(capsys, "classify", "--catalog", "htype",
                           "--param", "a=0.25")
    assert code == EXIT_OK
    assert "shrinking" in out
    assert "4.76470588235" in out  # 81/17
    assert "soliton_c" in out and "1.5" in out


def test_classify_json_schema(capsys):
    code, out, _ = run_cli(capsys, "classify", "--catalog", "triple",
                           "--format", "json")
    assert code == EXIT_OK
    document = json.loads(out)
    assert document["closed"] is True
    assert document["soliton"]["kind"] == "steady"
    assert len(document["ricci_eigenvalues"]) == 7


def test_classify_csv_single_row(capsys):
    code, out, _ = run_cli(capsys, "classify", "--catalog", "flat",
                           "--format", "csv")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert len(lines) == 2
    header = lines[0].split(",")
    assert "tau_norm2" in header and "curvature_ratio" in header


def test_inspect_works_without_brackets(capsys):
    code, out, _ = run_cli(capsys, "inspect", "--catalog",
                           "bryant-homogeneous")
    assert code == EXIT_OK
    assert "d_squared_residual" in out


def test_round_trip_dump_classify_bit_for_bit(tmp_path, capsys):
    dump = tmp_path / "entry.json"
    code, _, _ = run_cli(capsys, "catalog", "dump", "htype",
                         "--param", "a=0.25", "--out", str(dump))
    assert code == EXIT_OK
    direct = tmp_path / "direct.json"
    again = tmp_path / "again.json"
    assert run_cli(capsys, "classify", "--catalog", "htype", "--param",
                   "a=0.25", "--format", "json", "--out",
                   str(direct))[0] == EXIT_OK
    assert run_cli(capsys, "classify", "--input", str(dump), "--format",
                   "json", "--out", str(again))[0] == EXIT_OK
    assert direct.read_bytes() == again.read_bytes()


def test_catalog_list_formats(capsys):
    code, out, _ = run_cli(capsys, "catalog", "list")
    assert code == EXIT_OK
    for name in catalog.names():
        assert name in out
    code, out, _ = run_cli(capsys, "catalog", "list", "--format", "json")
    parsed = json.loads(out)
    assert {row["name"] for row in parsed} == set(catalog.names())


def test_soliton_table(capsys):
    code, out, _ = run_cli(capsys, "soliton", "--catalog", "htype",
                           "--param", "a=2")
    assert code == EXIT_OK
    assert "expanding" in out
    assert "algebraic" in out


def test_flow_csv_and_figure(tmp_path, capsys):
    out_file = tmp_path / "flow.csv"
    code, out, _ = run_cli(capsys, "flow", "--catalog",
                           "bryant-homogeneous", "--t-end", "0.02",
                           "--dt", "1e-3", "--format", "csv",
                           "--out", str(out_file), "--plot")
    assert code == EXIT_OK
    lines = out_file.read_text().splitlines()
    assert lines[0].startswith("t,phi_123,")
    assert len(lines) == 1 + 21
    figure = tmp_path / "flow.png"
    assert figure.exists() and figure.stat().st_size > 1000
    assert "figure written" in out


def test_flow_singularity_is_flagged_success(tmp_path, capsys):
    out_file = tmp_path / "singular.csv"
    code, _, _ = run_cli(capsys, "flow", "--catalog", "htype",
                         "--param", "a=0.25", "--t-end", "0.4",
                         "--dt", "2e-3", "--format", "csv",
                         "--out", str(out_file))
    assert code == EXIT_OK
    lines = out_file.read_text().splitlines()
    assert lines[-1].startswith("# singular_at=")
    t_singular = float(lines[-1].split("=")[1])
    assert abs(t_singular - 1.0 / 3.0) < 2e-3


def test_flow_table_summary(capsys):
    code, out, _ = run_cli(capsys, "flow", "--catalog", "htype",
                           "--t-end", "0.01", "--dt", "1e-3")
    assert code == EXIT_OK
    assert "samples" in out and "tau_norm2_final" in out


def test_bracket_flow_csv_header(capsys):
    code, out, _ = run_cli(capsys, "bracket-flow", "--param", "a=2",
                           "--param", "b=1", "--param", "c=0.5",
                           "--t-end", "0.05", "--dt", "1e-3",
                           "--format", "csv")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "t,a,b,c,f,funcG,H,F"
    assert len(lines) == 1 + 51


def test_bracket_flow_rejects_negative_start(capsys):
    code, _, err = run_cli(capsys, "bracket-flow", "--param", "a=-1",
                           "--t-end", "0.1", "--dt", "1e-2")
    assert code == EXIT_VALIDATION


def test_bracket_flow_rejects_unknown_coordinates(capsys):
    code, _, err = run_cli(capsys, "bracket-flow", "--param", "z=1",
                           "--t-end", "0.1", "--dt", "1e-2")
    assert code == EXIT_VALIDATION
    assert "a, b, c" in err


def test_sweep_csv_decreasing_ratio(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--catalog", "htype",
                           "--param", "a=0.25:2:0.25",
                           "--emit", "F,c,kind", "--format", "csv")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "a,F,c,kind"
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 8
    ratios = [float(r[1]) for r in rows]
    assert all(x > y for x, y in zip(ratios, ratios[1:]))
    kinds = [r[3] for r in rows]
    assert kinds[:3] == ["shrinking"] * 3
    assert kinds[3] == "steady"
    assert set(kinds[4:]) == {"expanding"}


def test_sweep_demands_exactly_one_range(capsys):
    code, _, err = run_cli(capsys, "sweep", "--catalog", "htype",
                           "--param", "a=1")
    assert code == EXIT_VALIDATION
    assert "exactly one ranged parameter" in err


def test_sweep_rejects_unknown_emit_column(capsys):
    code, _, err = run_cli(capsys, "sweep", "--catalog", "htype",
                           "--param", "a=1:2:1", "--emit", "bogus")
    assert code == EXIT_VALIDATION
    assert "unknown --emit column" in err


def test_sweep_parallel_matches_serial(tmp_path, capsys):
    serial = tmp_path / "serial.csv"
    parallel = tmp_path / "parallel.csv"
    base = ["sweep", "--catalog", "htype", "--param", "a=0.25:1.25:0.25",
            "--emit", "F,kind,tau_norm2", "--format", "csv"]
    assert run_cli(capsys, *base, "--jobs", "1", "--out",
                   str(serial))[0] == EXIT_OK
    assert run_cli(capsys, *base, "--jobs", "2", "--out",
                   str(parallel))[0] == EXIT_OK
    assert serial.read_bytes() == parallel.read_bytes()


def test_sweep_json_rows(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--catalog", "aa-expander",
                           "--param", "b=0.5:1.5:0.5",
                           "--emit", "F,kind", "--format", "json")
    assert code == EXIT_OK
    rows = json.loads(out)
    assert len(rows) == 3
    assert all(row["kind"] == "expanding" for row in rows)
    assert all(abs(row["F"] - 1.0) < 1e-9 for row in rows)


def test_sweep_figure(tmp_path, capsys):
    out_file = tmp_path / "sweep.csv"
    code, _, _ = run_cli(capsys, "sweep", "--catalog", "htype",
                         "--param", "a=0.5:1.5:0.5", "--emit", "F,kind",
                         "--format", "csv", "--out", str(out_file),
                         "--plot")
    assert code == EXIT_OK
    assert (tmp_path / "sweep.png").exists()


# --------------------------------------------------------------- wrappers

def test_console_script_and_module_entry():
    script = subprocess.run(["g2calc", "catalog", "list"],
                            capture_output=True, text=True)
    assert script.returncode == 0
    module = subprocess.run([sys.executable, "-m", "g2calc", "catalog",
                             "list"], capture_output=True, text=True)
    assert module.returncode == 0
    assert script.stdout == module.stdout


def test_help_exits_cleanly():
    assert main(["--help"]) == EXIT_OK
    assert main(["classify", "--help"]) == EXIT_OK
