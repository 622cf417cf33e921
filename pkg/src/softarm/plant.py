"""Simulated plant: stepper motors, pneumatic circuit, virtual time.

Everything advances in fixed millisecond ticks under a lockstep
scheduler, so runs are bit-for-bit reproducible.  The controllers see
the plant only through motor targets, digital pump/valve lines and the
pressure tap; mechanical imperfection lives entirely here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .kinematics import ArmGeometry, JointAngles, Pose3, StepGrid, forward_kinematics

MOTOR_NAMES = ("base", "shoulder", "minor")


@dataclass
class VirtualClock:
    now_ms: int = 0
    tick_ms: int = 1

    def __post_init__(self) -> None:
        if self.tick_ms < 1:
            raise ValueError("tick must be at least 1 ms")


class Scheduler:
    """Fires registered periodic nodes in registration order each tick.

    Registration order is the total order for same-tick work, which
    together with per-publisher sequence numbers makes every run's
    envelope stream identical.  Register upstream nodes (plant, sensor)
    before the controllers that consume them.
    """

    def __init__(self, clock: VirtualClock):
        self.clock = clock
        self._nodes: list[tuple[int, str, Callable[[int], None]]] = []

    def every(self, period_ms: int, name: str, fn: Callable[[int], None]) -> None:
        if period_ms < 1:
            raise ValueError("period must be at least 1 ms")
        self._nodes.append((period_ms, name, fn))

    def step_tick(self) -> int:
        self.clock.now_ms += self.clock.tick_ms
        now = self.clock.now_ms
        for period_ms, _name, fn in self._nodes:
            if now % period_ms == 0:
                fn(now)
        return now

    def run_until(self, until_ms: int) -> None:
        while self.clock.now_ms < until_ms:
            self.step_tick()

    def run_for(self, duration_ms: int) -> None:
        self.run_until(self.clock.now_ms + duration_ms)


@dataclass
class MotorSim:
    """One stepper: a driver phase slewing toward its target at a fixed
    microstep rate, and a mechanical index that follows the phase through
    a small hysteresis lag band.

    After a direction reversal the first ``hysteresis_steps`` emitted
    microsteps are absorbed by the lag band and move nothing, so an
    out-and-back excursion leaves the mechanism resting that many
    microsteps short of its original index.  The offset between phase
    and mechanism can never exceed the band, whatever the command
    history: steps are not lost, only parked in the band.
    """

    rate_sps: float = 500.0
    hysteresis_steps: int = 2
    target_step: int = 0
    commanded_step: int = 0  # driver phase actually emitted so far
    mechanical_step: int = 0
    direction: int = 0  # sign of the last emitted microstep
    _pending_lag: int = 0
    _accumulator: float = 0.0

    def __post_init__(self) -> None:
        if self.rate_sps <= 0:
            raise ValueError("step rate must be positive")
        if self.hysteresis_steps < 0:
            raise ValueError("hysteresis cannot be negative")

    @property
    def at_target(self) -> bool:
        return self.commanded_step == self.target_step

    def set_target(self, step: int) -> None:
        self.target_step = step

    def preset(self, step: int) -> None:
        """Place the motor at rest at ``step`` with no lag history."""
        self.target_step = self.commanded_step = self.mechanical_step = step
        self.direction = 0
        self._pending_lag = 0
        self._accumulator = 0.0

    def _emit_microstep(self, d: int) -> None:
        if self.direction != 0 and d != self.direction:
            self._pending_lag = self.hysteresis_steps
        self.direction = d
        self.commanded_step += d
        if (
            self._pending_lag > 0
            and abs(self.commanded_step - self.mechanical_step) <= self.hysteresis_steps
        ):
            self._pending_lag -= 1
        else:
            self.mechanical_step += d
            self._pending_lag = 0

    def tick(self, dt_ms: int) -> None:
        if self.at_target:
            self._accumulator = 0.0
            return
        self._accumulator += self.rate_sps * dt_ms / 1000.0
        while self._accumulator >= 1.0 and not self.at_target:
            self._accumulator -= 1.0
            self._emit_microstep(1 if self.target_step > self.commanded_step else -1)


@dataclass
class PneumaticSim:
    """First-order gauge-pressure model of pump, valve and vessel.

        dP/dt = c_pump*pump*(p_max - P)/p_max - c_valve*valve*P - c_leak*P

    integrated with explicit Euler at the clock tick and clamped to
    [0, p_max].  Inputs are duty fractions in [0, 1].
    """

    p_max_kpa: float = 58.7
    c_pump: float = 8.0
    c_valve: float = 0.5
    c_leak: float = 0.0
    pressure_kpa: float = 0.0
    pump_duty: float = 0.0
    valve_duty: float = 0.0

    def __post_init__(self) -> None:
        if self.p_max_kpa <= 0:
            raise ValueError("p_max must be positive")
        for name in ("c_pump", "c_valve", "c_leak"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} cannot be negative")

    def set_input(self, pump_duty: float, valve_duty: float) -> None:
        self.pump_duty = pump_duty
        self.valve_duty = valve_duty

    def derivative(self, pressure_kpa: float, pump_duty: float, valve_duty: float) -> float:
        fill = self.c_pump * pump_duty * (self.p_max_kpa - pressure_kpa) / self.p_max_kpa
        return fill - self.c_valve * valve_duty * pressure_kpa - self.c_leak * pressure_kpa

    def tick(self, dt_ms: int) -> None:
        dp = self.derivative(self.pressure_kpa, self.pump_duty, self.valve_duty)
        p = self.pressure_kpa + dp * dt_ms / 1000.0
        self.pressure_kpa = min(max(p, 0.0), self.p_max_kpa)


@dataclass(frozen=True)
class BacklashConfig:
    """End-effector play per axis, measured extreme to extreme in mm."""

    horizontal_mm: float = 3.5
    vertical_mm: float = 1.5
    perpendicular_mm: float = 10.0

    def play_for(self, axis: str) -> float:
        try:
            return {
                "horizontal": self.horizontal_mm,
                "vertical": self.vertical_mm,
                "perpendicular": self.perpendicular_mm,
            }[axis]
        except KeyError:
            raise ValueError(f"unknown probe axis {axis!r}") from None


def probe_displacement(
    theta_base_deg: float, config: BacklashConfig, axis: str, sign: int
) -> tuple[float, float, float]:
    """Offset of the end effector pushed to one extreme of its play.

    ``horizontal`` pushes along the arm's in-plane reach direction,
    ``vertical`` along z, ``perpendicular`` across the plane.  ``sign``
    picks the extreme; the offset magnitude is half the
    extreme-to-extreme play.  Returned relative to the resting pose so
    a throw measurement can difference two probes without dragging the
    resting coordinates through the arithmetic.
    """
    if sign not in (-1, 1):
        raise ValueError("probe sign must be -1 or +1")
    half = config.play_for(axis) / 2.0
    t_b = math.radians(theta_base_deg)
    unit = {
        "horizontal": (math.cos(t_b), math.sin(t_b), 0.0),
        "vertical": (0.0, 0.0, 1.0),
        "perpendicular": (-math.sin(t_b), math.cos(t_b), 0.0),
    }[axis]
    return (sign * half * unit[0], sign * half * unit[1], sign * half * unit[2])


def end_effector_probe(
    pose: Pose3,
    theta_base_deg: float,
    config: BacklashConfig,
    axis: str,
    sign: int,
) -> Pose3:
    """Pose of the end effector when pushed to one extreme of its play."""
    dx, dy, dz = probe_displacement(theta_base_deg, config, axis, sign)
    return Pose3(pose.x_mm + dx, pose.y_mm + dy, pose.z_mm + dz)


@dataclass
class ArmPlant:
    """The three joint motors plus the pneumatic circuit, as one node.

    ``mount_offset_steps`` models a miscalibrated home: the controllers
    address the motors in step indices, but the true joint angle of
    motor i is ``(mechanical_step + offset) * resolution``.
    """

    geometry: ArmGeometry = field(default_factory=ArmGeometry)
    grid: StepGrid = field(default_factory=StepGrid)
    motors: tuple[MotorSim, MotorSim, MotorSim] = field(
        default_factory=lambda: (MotorSim(), MotorSim(), MotorSim())
    )
    pneumatics: PneumaticSim = field(default_factory=PneumaticSim)
    backlash: BacklashConfig = field(default_factory=BacklashConfig)
    mount_offset_steps: tuple[int, int, int] = (0, 0, 0)

    def tick(self, _now_ms: int, dt_ms: int = 1) -> None:
        for motor in self.motors:
            motor.tick(dt_ms)
        self.pneumatics.tick(dt_ms)

    def preset_steps(self, steps: tuple[int, int, int]) -> None:
        for motor, step in zip(self.motors, steps):
            motor.preset(step)

    def set_targets(self, steps: tuple[int, int, int]) -> None:
        for motor, step in zip(self.motors, steps):
            motor.set_target(step)

    def phases(self) -> tuple[int, int, int]:
        return tuple(m.commanded_step for m in self.motors)

    def at_targets(self, steps: tuple[int, int, int]) -> bool:
        return all(m.commanded_step == s for m, s in zip(self.motors, steps))

    def mechanical_angles(self) -> JointAngles:
        res = self.grid.resolution_deg
        b, s, e = (
            (m.mechanical_step + o) * res
            for m, o in zip(self.motors, self.mount_offset_steps)
        )
        return JointAngles(b, s, e)

    def mechanical_pose(self) -> Pose3:
        return forward_kinematics(self.mechanical_angles(), self.geometry)

    def probe(self, axis: str, sign: int) -> Pose3:
        angles = self.mechanical_angles()
        return end_effector_probe(
            self.mechanical_pose(), angles.theta_base_deg, self.backlash, axis, sign
        )

    def steps_lost(self) -> int:
        """Full steps unaccounted for after settling, summed over motors.

        Lag parked inside the hysteresis band is expected and rounds to
        zero; anything reaching a whole full step counts as lost.
        """
        return sum(
            abs(m.commanded_step - m.mechanical_step) // self.grid.microstep_divisor
            for m in self.motors
        )
