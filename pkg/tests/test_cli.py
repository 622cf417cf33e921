"""Command line interface: subcommands, exit codes, output shapes."""

import json

import pytest

from softarm.cli import EXIT_CONFIG, EXIT_EXECUTION, EXIT_OK, EXIT_PARSE, main


def test_run_builtin_pick(capsys):
    assert main(["run", "--builtin", "pick"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("complete") == 8
    assert "G01 P35.000" in out


def test_run_builtin_json(capsys):
    assert main(["run", "--builtin", "syringe", "--json"]) == EXIT_OK
    records = json.loads(capsys.readouterr().out)
    assert len(records) == 8
    assert records[1]["instruction"] == "G01 Z20.000"
    assert all(r["outcome"] == "complete" for r in records)


def test_run_program_file(tmp_path, capsys):
    path = tmp_path / "prog.gcode"
    path.write_text("G01 X200 Z80\nG04 P50\n")
    assert main(["run", str(path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "G01 X200.000 Z80.000" in out
    assert "G04 P50" in out


def test_run_argument_errors(tmp_path, capsys):
    assert main(["run"]) == EXIT_PARSE
    path = tmp_path / "p.gcode"
    path.write_text("G01 X10 Z100\n")
    assert main(["run", str(path), "--builtin", "pick"]) == EXIT_PARSE
    assert main(["run", str(tmp_path / "missing.gcode")]) == EXIT_PARSE
    capsys.readouterr()


def test_run_parse_error(tmp_path, capsys):
    path = tmp_path / "bad.gcode"
    path.write_text("G01 X10\nwat\n")
    assert main(["run", str(path)]) == EXIT_PARSE
    assert "line 2" in capsys.readouterr().err


def test_run_config_error(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"geometry": {"l1_mm": -1}}))
    assert main(["run", "--builtin", "pick", "--config", str(cfg)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_run_unreachable_is_execution_error(tmp_path, capsys):
    path = tmp_path / "far.gcode"
    path.write_text("G01 X400 Y0 Z100\n")
    assert main(["run", str(path)]) == EXIT_EXECUTION
    captured = capsys.readouterr()
    assert "error" in captured.out
    assert "program aborted" in captured.err


def test_run_trace_and_report(tmp_path, capsys):
    trace = tmp_path / "trace.jsonl"
    report_dir = tmp_path / "report"
    code = main([
        "run", "--builtin", "pick",
        "--trace", str(trace), "--report-dir", str(report_dir),
    ])
    assert code == EXIT_OK
    assert trace.exists()
    first = json.loads(trace.read_text().splitlines()[0])
    assert first["type"] == "envelope"
    assert (report_dir / "run.csv").exists()
    assert (report_dir / "run.json").exists()
    assert (report_dir / "pressure.png").exists()
    capsys.readouterr()


def test_validate_table(capsys):
    assert main(["validate"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "move error (mm)" in out
    assert "steps lost" in out


def test_validate_json_and_report(tmp_path, capsys):
    report_dir = tmp_path / "val"
    assert main(["validate", "--json", "--report-dir", str(report_dir)]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["steps_lost"] == 0
    assert data["backlash_mm"]["perpendicular"] == 10.0
    assert (report_dir / "validation.png").exists()


def test_validate_infeasible_distance(tmp_path, capsys):
    cfg = tmp_path / "wide.json"
    cfg.write_text(json.dumps({"harness": {"distance_mm": 900.0}}))
    assert main(["validate", "--config", str(cfg)]) == EXIT_CONFIG
    assert "do not fit" in capsys.readouterr().err


def test_ik_solves(capsys):
    assert main(["ik", "200", "0", "80"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "steps" in out
    assert "grid error" in out


def test_ik_json(capsys):
    assert main(["ik", "--json", "150", "0", "250"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["angles_deg"] == pytest.approx([0.0, 90.0, 0.0])
    assert data["steps"] == [0, 800, 0]
    assert data["quantization_error_mm"] == 0.0


def test_ik_unreachable(capsys):
    assert main(["ik", "400", "0", "100"]) == EXIT_EXECUTION
    assert "ik:" in capsys.readouterr().err


def test_parse_canonical_echo(tmp_path, capsys):
    path = tmp_path / "p.gcode"
    path.write_text("g1 x1.5 ; comment\nG04 P10\n")
    assert main(["parse", str(path)]) == EXIT_OK
    assert capsys.readouterr().out == "G01 X1.500\nG04 P10\n"


def test_parse_json_line_numbers(tmp_path, capsys):
    path = tmp_path / "p.gcode"
    path.write_text("; header\nG01 X1\n\nG01 P0\n")
    assert main(["parse", str(path), "--json"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data == [
        {"line_no": 2, "instruction": "G01 X1.000"},
        {"line_no": 4, "instruction": "G01 P0.000"},
    ]


def test_parse_error_exit(tmp_path, capsys):
    path = tmp_path / "bad.gcode"
    path.write_text("G01 Q4\n")
    assert main(["parse", str(path)]) == EXIT_PARSE
    assert "line 1" in capsys.readouterr().err


def test_example_program_ships_and_runs(capsys):
    import pathlib

    example = pathlib.Path(__file__).resolve().parent.parent / "programs" / "pick_and_place.gcode"
    assert example.exists()
    assert main(["run", str(example)]) == EXIT_OK
    assert capsys.readouterr().out.count("complete") == 8
