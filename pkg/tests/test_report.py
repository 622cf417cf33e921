"""Report rendering: CSV, JSON and figure files."""

import csv
import json

from softarm.config import Config
from softarm.gcode import Move, Program
from softarm.harness import ValidationReport, run_validation
from softarm.orchestrator import Orchestrator, scenario_pick_and_place
from softarm.report import write_run_report, write_validation_report
from softarm.system import build


def test_validation_report_files(tmp_path):
    report = run_validation(Config())
    out = tmp_path / "val"
    paths = write_validation_report(report, str(out))
    assert sorted(p.rsplit("/", 1)[1] for p in paths) == [
        "validation.csv", "validation.json", "validation.png",
    ]

    with open(out / "validation.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["metric", "component", "mean", "sem", "n"]
    metrics = {(row[0], row[1]) for row in rows[1:]}
    assert ("move_error_mm", "horizontal") in metrics
    assert ("backlash_mm", "perpendicular") in metrics
    assert ("steps_lost", "total") in metrics

    data = json.loads((out / "validation.json").read_text())
    assert ValidationReport.from_dict(data) == report

    png = (out / "validation.png").read_bytes()
    assert png[:8] == b"\x89PNG\r\n\x1a\n"


def test_run_report_files(tmp_path):
    system = build(Config())
    try:
        records = Orchestrator(system).run_program(scenario_pick_and_place())
        pressure_log = system.pressure.debug_log
    finally:
        system.close()
    out = tmp_path / "run"
    paths = write_run_report(records, pressure_log, str(out))
    names = sorted(p.rsplit("/", 1)[1] for p in paths)
    assert names == ["pressure.png", "run.csv", "run.json"]

    with open(out / "run.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == [
        "line_no", "instruction", "dispatched_ms", "completed_ms", "outcome", "detail",
    ]
    assert len(rows) == 9
    assert rows[3][1] == "G01 P35.000"

    data = json.loads((out / "run.json").read_text())
    assert len(data) == 8
    assert data[0]["outcome"] == "complete"


def test_run_report_without_pressure_activity(tmp_path):
    system = build(Config())
    try:
        program_records = Orchestrator(system).run_program(
            Program((Move(200.0, 0.0, 80.0),), (1,))
        )
        pressure_log = system.pressure.debug_log
    finally:
        system.close()
    out = tmp_path / "runflat"
    paths = write_run_report(program_records, pressure_log, str(out))
    names = sorted(p.rsplit("/", 1)[1] for p in paths)
    # no PID updates ran, so no pressure figure
    assert names == ["run.csv", "run.json"]
