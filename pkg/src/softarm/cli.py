"""Command line front end.

Four subcommands: ``run`` executes a program (from a file or a built-in
scenario) on a fresh simulated stack, ``validate`` runs the accuracy
experiments, ``ik`` solves one pose, and ``parse`` checks a program and
echoes its canonical form.  Exit codes: 0 success, 1 configuration
error, 2 program parse error, 3 execution failure (an instruction that
errored or timed out, an unreachable target, lost steps).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import config as config_mod
from .gcode import ParseError, format_instruction, format_program, parse_program
from .harness import ExperimentError, run_validation
from .kinematics import (
    LimitViolation,
    Pose3,
    Unreachable,
    angles_to_steps,
    forward_kinematics,
    inverse_kinematics,
    steps_to_angles,
)
from .orchestrator import Orchestrator, scenario_pick_and_place, scenario_syringe
from .system import build

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARSE = 2
EXIT_EXECUTION = 3


def _fail(code: int, message: str) -> int:
    print(message, file=sys.stderr)
    return code


def _load_config(path: str | None):
    return config_mod.load(path)


def _add_common(parser: argparse.ArgumentParser, trace: bool = True) -> None:
    parser.add_argument("--config", metavar="PATH", help="JSON configuration file")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    if trace:
        parser.add_argument("--trace", metavar="PATH", help="write a JSONL message trace")
        parser.add_argument(
            "--report-dir", metavar="DIR", help="write CSV, JSON and figure files here"
        )


def _cmd_run(args: argparse.Namespace) -> int:
    if (args.program is None) == (args.builtin is None):
        return _fail(EXIT_PARSE, "run: give a program file or --builtin, not both")
    try:
        cfg = _load_config(args.config)
    except config_mod.ConfigError as exc:
        return _fail(EXIT_CONFIG, f"config error: {exc}")

    if args.builtin is not None:
        program = scenario_pick_and_place() if args.builtin == "pick" else scenario_syringe()
    else:
        try:
            with open(args.program, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            return _fail(EXIT_PARSE, f"cannot read program: {exc}")
        try:
            program = parse_program(text)
        except ParseError as exc:
            return _fail(EXIT_PARSE, f"parse error: {exc}")

    system = build(cfg, trace_path=args.trace)
    try:
        records = Orchestrator(system).run_program(program)
        if args.report_dir:
            from .report import write_run_report

            write_run_report(records, system.pressure.debug_log, args.report_dir)
    finally:
        system.close()

    if args.json:
        print(json.dumps([record.as_dict() for record in records], indent=2))
    else:
        for record in records:
            took = record.completed_at_ms - record.dispatched_at_ms
            print(f"{record.outcome:8s} line {record.line_no:<3d} "
                  f"{record.instruction}  ({took} ms)")
            if record.detail:
                print(f"         {record.detail}")
    ok = bool(records) and all(record.outcome == "complete" for record in records)
    if not ok and not args.json:
        print("program aborted", file=sys.stderr)
    return EXIT_OK if ok else EXIT_EXECUTION


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        cfg = _load_config(args.config)
    except config_mod.ConfigError as exc:
        return _fail(EXIT_CONFIG, f"config error: {exc}")
    try:
        report = run_validation(cfg, trace_path=args.trace)
    except (Unreachable, LimitViolation) as exc:
        return _fail(EXIT_CONFIG, f"config error: harness legs do not fit the workspace: {exc}")
    except ExperimentError as exc:
        return _fail(EXIT_EXECUTION, f"validation failed: {exc}")

    if args.report_dir:
        from .report import write_validation_report

        write_validation_report(report, args.report_dir)
    if args.json:
        print(json.dumps(report.as_dict(), indent=2))
    else:
        print(report.format_table())
    problems = report.violations()
    for problem in problems:
        print(f"violation: {problem}", file=sys.stderr)
    return EXIT_EXECUTION if problems else EXIT_OK


def _cmd_ik(args: argparse.Namespace) -> int:
    try:
        cfg = _load_config(args.config)
    except config_mod.ConfigError as exc:
        return _fail(EXIT_CONFIG, f"config error: {exc}")
    target = Pose3(args.x, args.y, args.z)
    try:
        angles = inverse_kinematics(target, cfg.geometry)
    except (Unreachable, LimitViolation) as exc:
        return _fail(EXIT_EXECUTION, f"ik: {exc}")
    steps = angles_to_steps(angles, cfg.step_grid)
    realized = steps_to_angles(steps, cfg.step_grid)
    realized_pose = forward_kinematics(realized, cfg.geometry)
    if args.json:
        print(json.dumps({
            "target": {"x_mm": target.x_mm, "y_mm": target.y_mm, "z_mm": target.z_mm},
            "angles_deg": list(angles.as_tuple()),
            "steps": list(steps),
            "realized_deg": list(realized.as_tuple()),
            "realized_pose": {
                "x_mm": realized_pose.x_mm,
                "y_mm": realized_pose.y_mm,
                "z_mm": realized_pose.z_mm,
            },
            "quantization_error_mm": target.distance_to(realized_pose),
        }, indent=2))
    else:
        print(f"angles   (deg): {angles.theta_base_deg:.4f} "
              f"{angles.theta1_deg:.4f} {angles.theta2_deg:.4f}")
        print(f"steps         : {steps[0]} {steps[1]} {steps[2]}")
        print(f"realized (deg): {realized.theta_base_deg:.4f} "
              f"{realized.theta1_deg:.4f} {realized.theta2_deg:.4f}")
        print(f"realized pose : {realized_pose.x_mm:.4f} "
              f"{realized_pose.y_mm:.4f} {realized_pose.z_mm:.4f}")
        print(f"grid error    : {target.distance_to(realized_pose):.4f} mm")
    return EXIT_OK


def _cmd_parse(args: argparse.Namespace) -> int:
    try:
        with open(args.program, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        return _fail(EXIT_PARSE, f"cannot read program: {exc}")
    try:
        program = parse_program(text)
    except ParseError as exc:
        return _fail(EXIT_PARSE, f"parse error: {exc}")
    if args.json:
        print(json.dumps([
            {"line_no": line_no, "instruction": format_instruction(instruction)}
            for line_no, instruction in zip(program.line_nos, program.instructions)
        ], indent=2))
    else:
        sys.stdout.write(format_program(program))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="softarm",
        description="Simulated pick-and-place arm: run programs, validate accuracy.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a program on the simulated stack")
    p_run.add_argument("program", nargs="?", help="program file")
    p_run.add_argument(
        "--builtin", choices=("pick", "syringe"), help="run a built-in scenario instead"
    )
    _add_common(p_run)
    p_run.set_defaults(fn=_cmd_run)

    p_val = sub.add_parser("validate", help="run the accuracy experiments")
    _add_common(p_val)
    p_val.set_defaults(fn=_cmd_validate)

    p_ik = sub.add_parser("ik", help="solve one pose and show the step targets")
    p_ik.add_argument("x", type=float)
    p_ik.add_argument("y", type=float)
    p_ik.add_argument("z", type=float)
    _add_common(p_ik, trace=False)
    p_ik.set_defaults(fn=_cmd_ik)

    p_parse = sub.add_parser("parse", help="check a program and echo its canonical form")
    p_parse.add_argument("program", help="program file")
    p_parse.add_argument("--json", action="store_true", help="machine-readable output")
    p_parse.set_defaults(fn=_cmd_parse)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
