"""Deterministic simulated control stack for a pick-and-place arm.

A two-link arm on a rotating base with a suction gripper, driven over
a typed publish/subscribe bus by small controller nodes, all running
in lockstep on a virtual millisecond clock.  Programs are a small
G-code dialect; a validation harness measures positioning accuracy the
way a bench test would.
"""

from .bus import Bus, Envelope, KindMismatch, MessageKind, Subscription, TraceWriter
from .config import Config, ConfigError, default_dict, from_dict, load
from .control import (
    ActuatorCommand,
    ArmControllerNode,
    NodeState,
    PidGains,
    PidState,
    PressureBand,
    PressureControllerNode,
    PwmSchedule,
    SensorNode,
    duty_to_pwm,
    pid_step,
    quantize_reading,
)
from .gcode import (
    Dwell,
    Instruction,
    Move,
    ParseError,
    Program,
    SetPressure,
    format_instruction,
    format_program,
    parse_line,
    parse_program,
)
from .harness import ErrorStat, ValidationReport, run_validation
from .kinematics import (
    ArmGeometry,
    JointAngles,
    LimitViolation,
    Pose3,
    StepGrid,
    StepTarget,
    Unreachable,
    angles_to_steps,
    forward_kinematics,
    inverse_kinematics,
    quantize,
    single_step_displacement,
    steps_to_angles,
)
from .orchestrator import (
    ExecutionRecord,
    Orchestrator,
    scenario_pick_and_place,
    scenario_syringe,
)
from .plant import ArmPlant, BacklashConfig, MotorSim, PneumaticSim, Scheduler, VirtualClock
from .system import System, build

__version__ = "0.1.0"

__all__ = [
    "ActuatorCommand",
    "ArmControllerNode",
    "ArmGeometry",
    "ArmPlant",
    "BacklashConfig",
    "Bus",
    "Config",
    "ConfigError",
    "Dwell",
    "Envelope",
    "ErrorStat",
    "ExecutionRecord",
    "Instruction",
    "JointAngles",
    "KindMismatch",
    "LimitViolation",
    "MessageKind",
    "MotorSim",
    "Move",
    "NodeState",
    "Orchestrator",
    "ParseError",
    "PidGains",
    "PidState",
    "PneumaticSim",
    "Pose3",
    "PressureBand",
    "PressureControllerNode",
    "Program",
    "PwmSchedule",
    "Scheduler",
    "SensorNode",
    "SetPressure",
    "StepGrid",
    "StepTarget",
    "Subscription",
    "System",
    "TraceWriter",
    "Unreachable",
    "ValidationReport",
    "VirtualClock",
    "angles_to_steps",
    "build",
    "default_dict",
    "duty_to_pwm",
    "format_instruction",
    "format_program",
    "forward_kinematics",
    "from_dict",
    "inverse_kinematics",
    "load",
    "parse_line",
    "parse_program",
    "pid_step",
    "quantize",
    "quantize_reading",
    "run_validation",
    "scenario_pick_and_place",
    "scenario_syringe",
    "single_step_displacement",
    "steps_to_angles",
]
