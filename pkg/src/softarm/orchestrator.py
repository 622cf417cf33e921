"""Sequential program execution over the bus.

The orchestrator is the single logical thread of control: it reads a
parsed program, dispatches one instruction at a time onto the command
topics, and blocks (driving the lockstep clock) until the matching
controller publishes a terminal status.  Moves with missing axes are
completed from the last realized pose, so partial ``G01`` lines behave
modally.  The first Error or timeout aborts the rest of the program.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bus import MessageKind, Subscription
from .control import (
    NodeState,
    PressureBand,
    TOPIC_ARM_COMMAND,
    TOPIC_ARM_STATUS,
    TOPIC_PRESSURE_COMMAND,
    TOPIC_PRESSURE_STATUS,
)
from .gcode import Dwell, Instruction, Move, Program, SetPressure, format_instruction
from .kinematics import Pose3
from .system import System

ORCHESTRATOR_ID = "n90-orchestrator"


@dataclass(frozen=True)
class ExecutionRecord:
    instruction: str  # canonical text form
    line_no: int
    dispatched_at_ms: int
    completed_at_ms: int
    outcome: str  # complete | error | timeout
    detail: str = ""

    def as_dict(self) -> dict:
        return {
            "instruction": self.instruction,
            "line_no": self.line_no,
            "dispatched_at_ms": self.dispatched_at_ms,
            "completed_at_ms": self.completed_at_ms,
            "outcome": self.outcome,
            "detail": self.detail,
        }


class Orchestrator:
    def __init__(self, system: System, timeout_ms: int | None = None):
        self.system = system
        self.timeout_ms = (
            timeout_ms if timeout_ms is not None else system.config.instruction_timeout_ms
        )
        bus = system.bus
        self._arm_pub = bus.advertise(TOPIC_ARM_COMMAND, MessageKind.ARM_COMMAND, ORCHESTRATOR_ID)
        self._pressure_pub = bus.advertise(
            TOPIC_PRESSURE_COMMAND, MessageKind.PRESSURE_COMMAND, ORCHESTRATOR_ID
        )
        self._arm_status = bus.subscribe(TOPIC_ARM_STATUS, MessageKind.ARM_STATUS)
        self._pressure_status = bus.subscribe(TOPIC_PRESSURE_STATUS, MessageKind.PRESSURE_STATUS)
        self.last_pose: Pose3 = system.home_pose()
        self._arm_seq = 0
        self._pressure_seq = 0

    def run_program(self, program: Program) -> list[ExecutionRecord]:
        """Execute every instruction in order; abort after the first failure."""
        records: list[ExecutionRecord] = []
        for instruction, line_no in zip(program.instructions, program.line_nos):
            record = self._run_one(instruction, line_no)
            records.append(record)
            if self.system.trace is not None:
                self.system.trace.append_record(record.as_dict())
            if record.outcome != "complete":
                break
        return records

    def _run_one(self, instruction: Instruction, line_no: int) -> ExecutionRecord:
        clock = self.system.clock
        dispatched_at = clock.now_ms
        text = format_instruction(instruction)

        if isinstance(instruction, Dwell):
            self.system.scheduler.run_for(instruction.ms)
            return ExecutionRecord(text, line_no, dispatched_at, clock.now_ms, "complete")

        if isinstance(instruction, Move):
            target = self._fill_axes(instruction)
            self._arm_pub.publish(
                {"x_mm": target.x_mm, "y_mm": target.y_mm, "z_mm": target.z_mm}
            )
            self._arm_seq += 1
            status = self._await_terminal(self._arm_status, self._arm_seq)
            if status is not None and status["state"] == NodeState.COMPLETE.value:
                realized = status["realized_pose"]
                self.last_pose = Pose3(realized["x_mm"], realized["y_mm"], realized["z_mm"])
        elif isinstance(instruction, SetPressure):
            band = PressureBand.around(
                instruction.gauge_kpa, self.system.config.pressure.band_halfwidth_kpa
            )
            self._pressure_pub.publish(
                {
                    "setpoint_kpa": band.setpoint_kpa,
                    "lower_kpa": band.lower_kpa,
                    "upper_kpa": band.upper_kpa,
                }
            )
            self._pressure_seq += 1
            status = self._await_terminal(self._pressure_status, self._pressure_seq)
        else:
            raise TypeError(f"not an instruction: {instruction!r}")

        if status is None:
            return ExecutionRecord(
                text, line_no, dispatched_at, clock.now_ms, "timeout",
                f"no terminal status within {self.timeout_ms} ms",
            )
        outcome = "complete" if status["state"] == NodeState.COMPLETE.value else "error"
        return ExecutionRecord(
            text, line_no, dispatched_at, status["stamp_ms"], outcome, status.get("detail", "")
        )

    def _fill_axes(self, move: Move) -> Pose3:
        return Pose3(
            move.x_mm if move.x_mm is not None else self.last_pose.x_mm,
            move.y_mm if move.y_mm is not None else self.last_pose.y_mm,
            move.z_mm if move.z_mm is not None else self.last_pose.z_mm,
        )

    def _await_terminal(self, subscription: Subscription, seq: int) -> dict | None:
        """Drive the clock until the command's terminal status arrives."""
        deadline = self.system.clock.now_ms + self.timeout_ms
        while True:
            for envelope in subscription.drain():
                payload = envelope.payload
                if payload["instruction_seq"] != seq:
                    continue  # stale status from an earlier command
                if payload["state"] in (NodeState.COMPLETE.value, NodeState.ERROR.value):
                    return {**payload, "stamp_ms": envelope.stamp_ms}
            if self.system.clock.now_ms >= deadline:
                return None
            self.system.scheduler.step_tick()


def scenario_pick_and_place(grasp_lower_mm: float = 0.0) -> Program:
    """The built-in eight-step demonstration program.

    Approach the object, descend onto it, grasp, lift, carry it across
    the workspace, lower it, release, retreat.  ``grasp_lower_mm``
    drops the grasping descent, as fragile objects gripped below their
    widest point require (10 mm for the syringe).
    """
    instructions = (
        Move(200.0, 0.0, 80.0),            # approach above the object
        Move(z_mm=30.0 - grasp_lower_mm),  # descend to grasp height
        SetPressure(35.0),                 # inflate the gripper
        Move(z_mm=120.0),                  # lift
        Move(140.0, 140.0, 120.0),         # carry across the workspace
        Move(z_mm=60.0),                   # lower into the drop zone
        SetPressure(0.0),                  # release
        Move(z_mm=140.0),                  # retreat clear
    )
    return Program(instructions, tuple(range(1, len(instructions) + 1)))


def scenario_syringe() -> Program:
    """Pick-and-place variant grasping the syringe 1 cm lower."""
    return scenario_pick_and_place(grasp_lower_mm=10.0)
