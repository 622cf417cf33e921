"""Validation harness: legs, experiments, report integrity."""

import math

import pytest

from softarm.config import Config, from_dict
from softarm.harness import (
    ErrorStat,
    ExperimentError,
    ValidationReport,
    position_legs,
    run_backlash_probe,
    run_validation,
)
from softarm.kinematics import Unreachable, inverse_kinematics
from softarm.orchestrator import Orchestrator
from softarm.system import build


def test_error_stat_of():
    stat = ErrorStat.of([1.0, 2.0, 3.0])
    assert stat.mean == pytest.approx(2.0)
    assert stat.sem == pytest.approx(1.0 / math.sqrt(3))
    assert stat.n == 3
    single = ErrorStat.of([4.2])
    assert (single.mean, single.sem, single.n) == (4.2, 0.0, 1)


def test_position_legs_span_distance_and_reach():
    config = Config()
    legs = position_legs(config)
    assert len(legs) == config.harness.n_moves
    for start, end in legs:
        assert math.dist(
            (start.x_mm, start.y_mm, start.z_mm), (end.x_mm, end.y_mm, end.z_mm)
        ) == pytest.approx(config.harness.distance_mm)
        inverse_kinematics(start, config.geometry)
        inverse_kinematics(end, config.geometry)
    # the second half of the cycle runs the same chords reversed
    assert legs[3] == (legs[0][1], legs[0][0])


def test_position_legs_unreachable_distance():
    config = from_dict({"harness": {"distance_mm": 900.0}})
    with pytest.raises(Unreachable):
        position_legs(config)


def test_backlash_probe_matches_config():
    system = build(Config())
    try:
        assert run_backlash_probe(system) == (3.5, 1.5, 10.0)
    finally:
        system.close()


def test_backlash_probe_envelopes(tmp_path):
    import json

    path = tmp_path / "t.jsonl"
    system = build(Config(), trace_path=str(path))
    try:
        run_backlash_probe(system)
    finally:
        system.close()
    lines = [json.loads(line) for line in path.read_text().splitlines()]
    probes = [line for line in lines if line["topic"] == "/plant/probe"]
    assert len(probes) == 6
    assert [p["payload"]["axis"] for p in probes] == [
        "horizontal", "horizontal", "vertical", "vertical",
        "perpendicular", "perpendicular",
    ]
    assert all(p["publisher"] == "n91-harness" for p in probes)


def test_run_validation_default_config():
    report = run_validation(Config())
    assert report.violations() == []
    assert report.steps_lost == 0
    assert report.backlash_mm == (3.5, 1.5, 10.0)
    assert report.single_step_error_mm == pytest.approx(4.712195193546203)
    assert report.move_error_horizontal_mm.n == 6
    assert report.rotation_error_deg.n == 6
    # alternating exact-home and one-microstep-residual legs
    assert report.rotation_error_deg.mean == pytest.approx(0.1125)
    assert report.move_error_horizontal_mm.mean == pytest.approx(0.684, abs=5e-4)
    assert report.move_error_vertical_mm.mean == pytest.approx(0.224, abs=5e-4)
    assert report.return_error_horizontal_mm.mean == pytest.approx(0.252, abs=5e-4)
    assert report.return_error_vertical_mm.mean == pytest.approx(0.042, abs=5e-4)


def test_report_round_trip_and_table():
    report = run_validation(Config())
    assert ValidationReport.from_dict(report.as_dict()) == report
    table = report.format_table()
    assert "move error (mm)" in table
    assert "10.000" in table  # perpendicular backlash column
    assert "steps lost" in table


def test_rotation_out_of_limits_is_config_error():
    from softarm.kinematics import LimitViolation

    config = from_dict({"harness": {"rotation_deg": 300.0}})
    with pytest.raises(LimitViolation):
        run_validation(config)


def test_experiment_error_on_impossible_timeout():
    config = from_dict({"instruction_timeout_ms": 1})
    system = build(config)
    try:
        orchestrator = Orchestrator(system)
        from softarm.harness import run_position_experiment

        with pytest.raises(ExperimentError, match="timeout"):
            run_position_experiment(system, orchestrator)
    finally:
        system.close()


def test_violations_flag_bad_report():
    report = run_validation(Config())
    import dataclasses

    broken = dataclasses.replace(report, steps_lost=3)
    assert any("steps lost" in p for p in broken.violations())
