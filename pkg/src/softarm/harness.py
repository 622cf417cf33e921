"""Validation harness: repeatable accuracy experiments on the full stack.

Re-creates the bench protocol on the simulated arm: long in-plane
moves with a return to start, repeated base rotations, and a backlash
probe on each end-effector axis.  Position errors are reported as
horizontal and vertical components with the standard error of the mean
over the repeats, laid out like the measured-accuracy table, and the
whole report serializes losslessly to JSON.

With 150 mm links the workspace is a 300 mm-radius ball slice, so a
500 mm straight-line move cannot start from the home pose; the legs
are through-base chords (the base swings half a turn while the arm
folds), each entered by an unmeasured setup move.  Move errors are
measured against the commanded endpoint; return errors against the
mechanically realized start, which isolates the reversal lag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import stdev
from typing import Any, Mapping

from .bus import MessageKind
from .config import Config
from .gcode import Move, Program
from .kinematics import (
    JointAngles,
    Pose3,
    forward_kinematics,
    inverse_kinematics,
    single_step_displacement,
)
from .orchestrator import ExecutionRecord, Orchestrator
from .plant import probe_displacement
from .system import System, build

TOPIC_PLANT_PROBE = "/plant/probe"
HARNESS_ID = "n91-harness"

PROBE_AXES = ("horizontal", "vertical", "perpendicular")

# Leg shapes for the position experiment, scaled to the requested
# distance: (start point, fraction of the distance spent on x).  The
# vertical extent follows from the straight-line length.  All three are
# feasible across the default workspace at the default 500 mm.
_LEG_SHAPES = (
    ((250.0, 0.0, 100.0), -1.0),
    ((200.0, 0.0, -30.0), -0.9),
    ((213.5, 0.0, -25.0), -math.sqrt(182400.0) / 500.0),
)


class ExperimentError(RuntimeError):
    """An experiment instruction did not complete."""


@dataclass(frozen=True)
class ErrorStat:
    mean: float
    sem: float
    n: int

    @classmethod
    def of(cls, samples: list[float]) -> "ErrorStat":
        n = len(samples)
        mean = sum(samples) / n
        sem = stdev(samples) / math.sqrt(n) if n > 1 else 0.0
        return cls(mean, sem, n)

    def as_dict(self) -> dict[str, Any]:
        return {"mean": self.mean, "sem": self.sem, "n": self.n}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ErrorStat":
        return cls(data["mean"], data["sem"], data["n"])


@dataclass(frozen=True)
class ValidationReport:
    distance_mm: float
    n_moves: int
    rotation_deg: float
    rotation_repeats: int
    move_error_horizontal_mm: ErrorStat
    move_error_vertical_mm: ErrorStat
    return_error_horizontal_mm: ErrorStat
    return_error_vertical_mm: ErrorStat
    rotation_error_deg: ErrorStat
    backlash_mm: tuple[float, float, float]  # horizontal, vertical, perpendicular
    single_step_error_mm: float
    steps_lost: int

    def as_dict(self) -> dict[str, Any]:
        return {
            "distance_mm": self.distance_mm,
            "n_moves": self.n_moves,
            "rotation_deg": self.rotation_deg,
            "rotation_repeats": self.rotation_repeats,
            "move_error_horizontal_mm": self.move_error_horizontal_mm.as_dict(),
            "move_error_vertical_mm": self.move_error_vertical_mm.as_dict(),
            "return_error_horizontal_mm": self.return_error_horizontal_mm.as_dict(),
            "return_error_vertical_mm": self.return_error_vertical_mm.as_dict(),
            "rotation_error_deg": self.rotation_error_deg.as_dict(),
            "backlash_mm": {
                "horizontal": self.backlash_mm[0],
                "vertical": self.backlash_mm[1],
                "perpendicular": self.backlash_mm[2],
            },
            "single_step_error_mm": self.single_step_error_mm,
            "steps_lost": self.steps_lost,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ValidationReport":
        backlash = data["backlash_mm"]
        return cls(
            distance_mm=data["distance_mm"],
            n_moves=data["n_moves"],
            rotation_deg=data["rotation_deg"],
            rotation_repeats=data["rotation_repeats"],
            move_error_horizontal_mm=ErrorStat.from_dict(data["move_error_horizontal_mm"]),
            move_error_vertical_mm=ErrorStat.from_dict(data["move_error_vertical_mm"]),
            return_error_horizontal_mm=ErrorStat.from_dict(data["return_error_horizontal_mm"]),
            return_error_vertical_mm=ErrorStat.from_dict(data["return_error_vertical_mm"]),
            rotation_error_deg=ErrorStat.from_dict(data["rotation_error_deg"]),
            backlash_mm=(backlash["horizontal"], backlash["vertical"], backlash["perpendicular"]),
            single_step_error_mm=data["single_step_error_mm"],
            steps_lost=data["steps_lost"],
        )

    def violations(self) -> list[str]:
        """Invariant checks behind the validate exit code."""
        problems = []
        if self.steps_lost != 0:
            problems.append(f"steps lost: {self.steps_lost}")
        for name in (
            "move_error_horizontal_mm", "move_error_vertical_mm",
            "return_error_horizontal_mm", "return_error_vertical_mm",
            "rotation_error_deg",
        ):
            stat: ErrorStat = getattr(self, name)
            if stat.sem < 0 or not math.isfinite(stat.mean):
                problems.append(f"bad statistic in {name}")
        if ValidationReport.from_dict(self.as_dict()) != self:
            problems.append("report does not serialize losslessly")
        return problems

    def format_table(self) -> str:
        def pm(stat: ErrorStat) -> str:
            return f"{stat.mean:.3f} +/- {stat.sem:.3f}"

        rows = [
            f"{self.n_moves} moves of {self.distance_mm:g} mm, "
            f"{self.rotation_repeats}x {self.rotation_deg:g} deg rotation",
            "",
            f"{'':34s}{'horizontal':>18s}{'vertical':>18s}{'perpendicular':>16s}",
            f"{'move error (mm)':34s}{pm(self.move_error_horizontal_mm):>18s}"
            f"{pm(self.move_error_vertical_mm):>18s}{'-':>16s}",
            f"{'return error (mm)':34s}{pm(self.return_error_horizontal_mm):>18s}"
            f"{pm(self.return_error_vertical_mm):>18s}{'-':>16s}",
            f"{'end effector backlash (mm)':34s}{self.backlash_mm[0]:>18.3f}"
            f"{self.backlash_mm[1]:>18.3f}{self.backlash_mm[2]:>16.3f}",
            f"{'rotation error (deg)':34s}{pm(self.rotation_error_deg):>18s}",
            f"{'single step error at pose (mm)':34s}{self.single_step_error_mm:>18.3f}",
            f"{'steps lost':34s}{self.steps_lost:>18d}",
        ]
        return "\n".join(rows)


def _move(orchestrator: Orchestrator, pose: Pose3) -> ExecutionRecord:
    program = Program((Move(pose.x_mm, pose.y_mm, pose.z_mm),), (1,))
    record = orchestrator.run_program(program)[0]
    if record.outcome != "complete":
        raise ExperimentError(f"move to {pose} failed: {record.outcome} {record.detail}")
    return record


def position_legs(config: Config) -> list[tuple[Pose3, Pose3]]:
    """Endpoint pairs for the position experiment, checked reachable.

    Raises Unreachable (letting the caller treat it as a configuration
    error) before any motion when the requested distance does not fit
    the workspace.
    """
    distance = config.harness.distance_mm
    legs: list[tuple[Pose3, Pose3]] = []
    for index in range(config.harness.n_moves):
        (ax, ay, az), x_fraction = _LEG_SHAPES[index % len(_LEG_SHAPES)]
        dx = x_fraction * distance
        dz_sq = distance * distance - dx * dx
        dz = math.sqrt(dz_sq) if dz_sq > 0 else 0.0
        start = Pose3(ax, ay, az)
        end = Pose3(ax + dx, ay, az + dz)
        if (index // len(_LEG_SHAPES)) % 2 == 1:
            start, end = end, start
        legs.append((start, end))
    for leg in legs:
        for endpoint in leg:
            inverse_kinematics(endpoint, config.geometry)  # raises if out of reach
    return legs


def run_position_experiment(
    system: System, orchestrator: Orchestrator
) -> tuple[list[tuple[float, float]], list[tuple[float, float]]]:
    """Long-move accuracy: returns (move_errors, return_errors).

    Each entry is the (horizontal, vertical) error component in mm; the
    horizontal component collapses x and y since legs live in a vertical
    plane through the base.
    """
    move_errors: list[tuple[float, float]] = []
    return_errors: list[tuple[float, float]] = []
    for start, end in position_legs(system.config):
        _move(orchestrator, start)  # setup leg, not measured
        rest = system.plant.mechanical_pose()
        _move(orchestrator, end)
        there = system.plant.mechanical_pose()
        move_errors.append(
            (
                math.hypot(there.x_mm - end.x_mm, there.y_mm - end.y_mm),
                abs(there.z_mm - end.z_mm),
            )
        )
        _move(orchestrator, start)
        back = system.plant.mechanical_pose()
        return_errors.append(
            (
                math.hypot(back.x_mm - rest.x_mm, back.y_mm - rest.y_mm),
                abs(back.z_mm - rest.z_mm),
            )
        )
    return move_errors, return_errors


def run_rotation_experiment(system: System, orchestrator: Orchestrator) -> list[float]:
    """Base-rotation accuracy: angular residual (deg) after each leg."""
    config = system.config
    home_angles = system.home_angles()
    home_pose = system.home_pose()
    rotated = JointAngles(
        home_angles.theta_base_deg + config.harness.rotation_deg,
        home_angles.theta1_deg,
        home_angles.theta2_deg,
    )
    config.geometry.check_limits(rotated)
    rotated_pose = forward_kinematics(rotated, config.geometry)

    _move(orchestrator, home_pose)  # re-home after whatever ran before
    residuals: list[float] = []
    for _ in range(config.harness.rotation_repeats):
        for target_pose, target_base in (
            (rotated_pose, rotated.theta_base_deg),
            (home_pose, home_angles.theta_base_deg),
        ):
            _move(orchestrator, target_pose)
            mech = system.plant.mechanical_angles()
            residuals.append(abs(mech.theta_base_deg - target_base))
    return residuals


def run_backlash_probe(system: System) -> tuple[float, float, float]:
    """Measured end-effector play per axis, extreme to extreme.

    The probe is differenced in displacement space, the way a dial
    indicator zeroed at rest reads total throw, so the report carries
    the play without the resting coordinates' rounding.
    """
    probe_pub = system.bus.advertise(TOPIC_PLANT_PROBE, MessageKind.PLANT_PROBE, HARNESS_ID)
    theta_base = system.plant.mechanical_angles().theta_base_deg
    throws = []
    for axis in PROBE_AXES:
        extremes = {}
        for sign in (1, -1):
            extremes[sign] = probe_displacement(theta_base, system.plant.backlash, axis, sign)
            pose = system.plant.probe(axis, sign)
            probe_pub.publish(
                {
                    "axis": axis,
                    "sign": sign,
                    "x_mm": pose.x_mm,
                    "y_mm": pose.y_mm,
                    "z_mm": pose.z_mm,
                }
            )
        throws.append(math.dist(extremes[1], extremes[-1]))
    return tuple(throws)


def run_validation(config: Config, trace_path: str | None = None) -> ValidationReport:
    """Run every experiment on a fresh system and assemble the report."""
    system = build(config, trace_path=trace_path)
    try:
        orchestrator = Orchestrator(system)
        backlash = run_backlash_probe(system)
        move_errors, return_errors = run_position_experiment(system, orchestrator)
        rotation_residuals = run_rotation_experiment(system, orchestrator)
        single_step = single_step_displacement(
            JointAngles(
                config.home.theta_base_deg, config.home.theta1_deg, config.home.theta2_deg
            ),
            config.geometry,
            config.step_grid,
        )
        return ValidationReport(
            distance_mm=config.harness.distance_mm,
            n_moves=config.harness.n_moves,
            rotation_deg=config.harness.rotation_deg,
            rotation_repeats=config.harness.rotation_repeats,
            move_error_horizontal_mm=ErrorStat.of([e[0] for e in move_errors]),
            move_error_vertical_mm=ErrorStat.of([e[1] for e in move_errors]),
            return_error_horizontal_mm=ErrorStat.of([e[0] for e in return_errors]),
            return_error_vertical_mm=ErrorStat.of([e[1] for e in return_errors]),
            rotation_error_deg=ErrorStat.of(rotation_residuals),
            backlash_mm=backlash,
            single_step_error_mm=single_step,
            steps_lost=system.plant.steps_lost(),
        )
    finally:
        system.close()
