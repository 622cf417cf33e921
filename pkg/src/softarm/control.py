"""Controller nodes: arm motion, gripper pressure, pressure sensing.

The pressure loop is a banded PID.  Inside [lower, upper] the actuators
are released entirely and the integral freezes; outside, the integral
is halved whenever the error changes sign so that crossing the setpoint
sheds accumulated wind-up instead of overshooting with it.  A positive
output drives the pump, a negative one the vent valve, never both.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Mapping

from . import plant as plant_mod
from .bus import Bus, MessageKind, PublisherHandle, Subscription
from .kinematics import (
    ArmGeometry,
    JointAngles,
    LimitViolation,
    Pose3,
    StepGrid,
    Unreachable,
    inverse_kinematics,
    quantize,
)

TOPIC_ARM_COMMAND = "/arm/command"
TOPIC_ARM_STATUS = "/arm/status"
TOPIC_PRESSURE_COMMAND = "/pressure/command"
TOPIC_PRESSURE_READING = "/pressure/reading"
TOPIC_PRESSURE_STATUS = "/pressure/status"


class NodeState(Enum):
    IDLE = "idle"
    BUSY = "busy"
    COMPLETE = "complete"
    ERROR = "error"


@dataclass(frozen=True)
class NodeStatus:
    state: NodeState
    instruction_seq: int
    detail: str = ""

    def payload(self, **extra: Any) -> dict[str, Any]:
        return {
            "state": self.state.value,
            "instruction_seq": self.instruction_seq,
            "detail": self.detail,
            **extra,
        }


@dataclass(frozen=True)
class PressureBand:
    setpoint_kpa: float
    lower_kpa: float
    upper_kpa: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.lower_kpa <= self.setpoint_kpa <= self.upper_kpa:
            raise ValueError("band must satisfy 0 <= lower <= setpoint <= upper")

    @classmethod
    def around(cls, setpoint_kpa: float, halfwidth_kpa: float) -> "PressureBand":
        return cls(
            setpoint_kpa,
            max(0.0, setpoint_kpa - halfwidth_kpa),
            setpoint_kpa + halfwidth_kpa,
        )

    def contains(self, reading_kpa: float) -> bool:
        return self.lower_kpa <= reading_kpa <= self.upper_kpa


@dataclass(frozen=True)
class ActuatorCommand:
    pump_duty: float
    valve_duty: float


@dataclass(frozen=True)
class PwmSchedule:
    period_ms: int
    on_ms: int

    def line_state(self, now_ms: int) -> float:
        return 1.0 if (now_ms % self.period_ms) < self.on_ms else 0.0


def duty_to_pwm(duty: float, period_ms: int = 10) -> PwmSchedule:
    """Quantize a duty fraction onto a millisecond on/off schedule."""
    if not 0.0 <= duty <= 1.0:
        raise ValueError("duty must lie in [0, 1]")
    if period_ms < 1:
        raise ValueError("PWM period must be at least 1 ms")
    # round half up so the on time always reproduces duty within 1/period
    on_ms = int(duty * period_ms + 0.5)
    return PwmSchedule(period_ms, on_ms)


@dataclass(frozen=True)
class PidGains:
    kp: float = 0.05
    ki: float = 0.02
    kd: float = 0.0
    integral_max: float = 25.0

    def __post_init__(self) -> None:
        if self.integral_max < 0:
            raise ValueError("integral clamp cannot be negative")


@dataclass(frozen=True)
class PidState:
    gains: PidGains = field(default_factory=PidGains)
    setpoint_kpa: float = 0.0
    integral: float = 0.0
    last_error: float = 0.0
    last_sign: int = 0  # sign of the last nonzero out-of-band error


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def pid_step(
    state: PidState, band: PressureBand, reading_kpa: float, dt_s: float
) -> tuple[PidState, ActuatorCommand]:
    """One banded PID update; returns the new state and actuator output."""
    if dt_s <= 0:
        raise ValueError("dt must be positive")
    error = band.setpoint_kpa - reading_kpa

    if band.contains(reading_kpa):
        # band hold: actuators released, integral frozen
        return replace(state, setpoint_kpa=band.setpoint_kpa), ActuatorCommand(0.0, 0.0)

    gains = state.gains
    integral = state.integral
    sign = _sign(error)
    if sign != 0 and state.last_sign != 0 and sign != state.last_sign:
        integral = integral / 2.0  # crossed the setpoint: shed wind-up
    integral = integral + error * dt_s
    integral = min(max(integral, -gains.integral_max), gains.integral_max)

    output = (
        gains.kp * error
        + gains.ki * integral
        + gains.kd * (error - state.last_error) / dt_s
    )
    if output > 0:
        command = ActuatorCommand(min(output, 1.0), 0.0)
    elif output < 0:
        command = ActuatorCommand(0.0, min(-output, 1.0))
    else:
        command = ActuatorCommand(0.0, 0.0)

    new_state = PidState(
        gains=gains,
        setpoint_kpa=band.setpoint_kpa,
        integral=integral,
        last_error=error,
        last_sign=sign if sign != 0 else state.last_sign,
    )
    return new_state, command


def quantize_reading(pressure_kpa: float, resolution_kpa: float) -> float:
    if resolution_kpa <= 0:
        raise ValueError("sensor resolution must be positive")
    # trailing round keeps the value tidy after the inexact multiply
    return round(round(pressure_kpa / resolution_kpa) * resolution_kpa, 9)


class SensorNode:
    """Publishes the quantized plant pressure at a fixed period."""

    def __init__(
        self,
        bus: Bus,
        pneumatics: plant_mod.PneumaticSim,
        node_id: str,
        resolution_kpa: float = 0.1,
        period_ms: int = 10,
    ):
        if period_ms < 1:
            raise ValueError("sensor period must be at least 1 ms")
        self.pneumatics = pneumatics
        self.resolution_kpa = resolution_kpa
        self.period_ms = period_ms
        self._pub = bus.advertise(
            TOPIC_PRESSURE_READING, MessageKind.PRESSURE_READING, node_id
        )

    def step(self, _now_ms: int) -> None:
        reading = quantize_reading(self.pneumatics.pressure_kpa, self.resolution_kpa)
        self._pub.publish({"pressure_kpa": reading})


class ArmControllerNode:
    """Executes Cartesian move commands through IK and the step drivers.

    For each accepted command: solve IK, snap to the microstep grid,
    publish Busy, slew the motors, then publish Complete carrying the
    realized (grid) angles and pose.  IK failures terminate the command
    with Error and no motion.  Exactly one Busy and one terminal status
    are published per command.
    """

    def __init__(
        self,
        bus: Bus,
        plant: plant_mod.ArmPlant,
        node_id: str,
        geometry: ArmGeometry | None = None,
        grid: StepGrid | None = None,
    ):
        self.plant = plant
        self.geometry = geometry or plant.geometry
        self.grid = grid or plant.grid
        self._status = bus.advertise(TOPIC_ARM_STATUS, MessageKind.ARM_STATUS, node_id)
        self._commands = bus.subscribe(TOPIC_ARM_COMMAND, MessageKind.ARM_COMMAND)
        self._seq = 0
        self._active_target: tuple[int, int, int] | None = None
        self._active_realized: tuple[JointAngles, Pose3] | None = None

    def step(self, _now_ms: int) -> None:
        if self._active_target is None:
            envelope = self._commands.pop()
            if envelope is not None:
                self._accept(envelope.payload)
        if self._active_target is not None and self.plant.at_targets(self._active_target):
            realized, pose = self._active_realized
            self._status.publish(
                NodeStatus(NodeState.COMPLETE, self._seq).payload(
                    realized_pose={"x_mm": pose.x_mm, "y_mm": pose.y_mm, "z_mm": pose.z_mm},
                    realized_angles={
                        "theta_base_deg": realized.theta_base_deg,
                        "theta1_deg": realized.theta1_deg,
                        "theta2_deg": realized.theta2_deg,
                    },
                )
            )
            self._active_target = None
            self._active_realized = None

    def _accept(self, payload: Mapping[str, Any]) -> None:
        self._seq += 1
        self._status.publish(NodeStatus(NodeState.BUSY, self._seq).payload())
        target = Pose3(payload["x_mm"], payload["y_mm"], payload["z_mm"])
        try:
            angles = inverse_kinematics(target, self.geometry)
        except (Unreachable, LimitViolation) as exc:
            self._status.publish(
                NodeStatus(NodeState.ERROR, self._seq, detail=str(exc)).payload()
            )
            return
        step_target = quantize(angles, self.grid, self.geometry)
        self.plant.set_targets(step_target.steps)
        self._active_target = step_target.steps
        self._active_realized = (step_target.realized, step_target.realized_pose)


class PressureControllerNode:
    """Regulates gripper pressure to the commanded band.

    Publishes Busy on command acceptance and Complete on the first
    reading inside the band; a release command (setpoint 0) completes
    once the reading falls to the release threshold.  Regulation keeps
    running after Complete so the band holds during later instructions.
    A watchdog turns sensor silence while busy into an Error status.
    """

    def __init__(
        self,
        bus: Bus,
        pneumatics: plant_mod.PneumaticSim,
        node_id: str,
        gains: PidGains | None = None,
        watchdog_ms: int = 500,
        release_threshold_kpa: float = 1.0,
        pwm_period_ms: int = 10,
        pulsed_pwm: bool = False,
        default_dt_s: float = 0.01,
    ):
        self.pneumatics = pneumatics
        self.watchdog_ms = watchdog_ms
        self.default_dt_s = default_dt_s
        self.release_threshold_kpa = release_threshold_kpa
        self.pwm_period_ms = pwm_period_ms
        self.pulsed_pwm = pulsed_pwm
        self.pid = PidState(gains=gains or PidGains())
        self.band: PressureBand | None = None
        self._status = bus.advertise(
            TOPIC_PRESSURE_STATUS, MessageKind.PRESSURE_STATUS, node_id
        )
        self._commands = bus.subscribe(TOPIC_PRESSURE_COMMAND, MessageKind.PRESSURE_COMMAND)
        self._readings = bus.subscribe(TOPIC_PRESSURE_READING, MessageKind.PRESSURE_READING)
        self._seq = 0
        self._waiting = False
        self._accepted_at_ms = 0
        self._last_reading: tuple[int, float] | None = None  # (stamp, value)
        self._pump = PwmSchedule(pwm_period_ms, 0)
        self._valve = PwmSchedule(pwm_period_ms, 0)
        # (stamp, reading, integral, pump_duty, valve_duty) per PID update
        self.debug_log: list[tuple[int, float, float, float, float]] = []

    def step(self, now_ms: int) -> None:
        # hold further commands in the queue until the active one terminates
        envelope = self._commands.pop() if not self._waiting else None
        if envelope is not None:
            payload = envelope.payload
            self.band = PressureBand(
                payload["setpoint_kpa"], payload["lower_kpa"], payload["upper_kpa"]
            )
            self._seq += 1
            self._waiting = True
            self._accepted_at_ms = now_ms
            self._status.publish(NodeStatus(NodeState.BUSY, self._seq).payload())

        for reading in self._readings.drain():
            self._on_reading(reading.stamp_ms, reading.payload["pressure_kpa"])

        if self._waiting:
            last_seen = (
                self._last_reading[0]
                if self._last_reading is not None
                else self._accepted_at_ms
            )
            if now_ms - last_seen > self.watchdog_ms:
                self._waiting = False
                self._terminate(NodeState.ERROR, "sensor timeout", None)
                self._apply(ActuatorCommand(0.0, 0.0))

        self._drive_plant(now_ms)

    def _on_reading(self, stamp_ms: int, value_kpa: float) -> None:
        previous = self._last_reading
        self._last_reading = (stamp_ms, value_kpa)
        if self.band is None:
            return
        dt_s = (
            (stamp_ms - previous[0]) / 1000.0
            if previous is not None and stamp_ms > previous[0]
            else self.default_dt_s
        )
        self.pid, command = pid_step(self.pid, self.band, value_kpa, dt_s)
        self.debug_log.append(
            (stamp_ms, value_kpa, self.pid.integral, command.pump_duty, command.valve_duty)
        )
        self._apply(command)
        if self._waiting and self._is_satisfied(value_kpa):
            self._waiting = False
            self._terminate(NodeState.COMPLETE, "", value_kpa)

    def _is_satisfied(self, reading_kpa: float) -> bool:
        if self.band.setpoint_kpa == 0.0:
            return reading_kpa <= self.release_threshold_kpa
        return self.band.contains(reading_kpa)

    def _terminate(self, state: NodeState, detail: str, reading: float | None) -> None:
        self._status.publish(
            NodeStatus(state, self._seq, detail=detail).payload(reading_kpa=reading)
        )

    def _apply(self, command: ActuatorCommand) -> None:
        self._pump = duty_to_pwm(command.pump_duty, self.pwm_period_ms)
        self._valve = duty_to_pwm(command.valve_duty, self.pwm_period_ms)

    def _drive_plant(self, now_ms: int) -> None:
        if self.pulsed_pwm:
            # high-fidelity mode: the plant sees the binary line levels
            self.pneumatics.set_input(
                self._pump.line_state(now_ms), self._valve.line_state(now_ms)
            )
        else:
            self.pneumatics.set_input(
                self._pump.on_ms / self._pump.period_ms,
                self._valve.on_ms / self._valve.period_ms,
            )
