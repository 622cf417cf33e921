"""Wiring: one configured, ready-to-run simulated stack.

Builds the bus, clock, plant and controller nodes and registers them
with the lockstep scheduler in dataflow order (plant, sensor, arm
controller, pressure controller), which fixes the same-tick execution
and therefore the entire envelope stream.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bus import Bus, TraceWriter
from .config import Config
from .control import ArmControllerNode, PressureControllerNode, SensorNode
from .kinematics import JointAngles, Pose3, angles_to_steps, forward_kinematics, steps_to_angles
from .plant import ArmPlant, MotorSim, PneumaticSim, Scheduler, VirtualClock


@dataclass
class System:
    config: Config
    clock: VirtualClock
    bus: Bus
    plant: ArmPlant
    scheduler: Scheduler
    sensor: SensorNode
    arm: ArmControllerNode
    pressure: PressureControllerNode
    home_steps: tuple[int, int, int]
    trace: TraceWriter | None = None

    def home_angles(self) -> JointAngles:
        """The grid-snapped home the controllers believe they start at."""
        return steps_to_angles(self.home_steps, self.config.step_grid)

    def home_pose(self) -> Pose3:
        return forward_kinematics(self.home_angles(), self.config.geometry)

    def settle(self, max_ms: int = 60000) -> None:
        """Tick until all motors reach their targets."""
        deadline = self.clock.now_ms + max_ms
        while not all(m.at_target for m in self.plant.motors):
            if self.clock.now_ms >= deadline:
                raise RuntimeError("motors did not settle in time")
            self.scheduler.step_tick()

    def close(self) -> None:
        if self.trace is not None:
            self.trace.close()


def build(config: Config, trace_path: str | None = None) -> System:
    clock = VirtualClock(tick_ms=config.clock_tick_ms)
    bus = Bus(now_ms=lambda: clock.now_ms)

    path = trace_path if trace_path is not None else config.trace_path
    trace = TraceWriter(path) if path else None
    bus.trace = trace

    home = JointAngles(
        config.home.theta_base_deg,
        config.home.theta1_deg,
        config.home.theta2_deg,
    )
    config.geometry.check_limits(home)
    home_steps = angles_to_steps(home, config.step_grid)
    offset_steps = angles_to_steps(
        JointAngles(*config.harness.start_offset_deg), config.step_grid
    )

    plant = ArmPlant(
        geometry=config.geometry,
        grid=config.step_grid,
        motors=tuple(
            MotorSim(
                rate_sps=config.motors.rate_sps,
                hysteresis_steps=config.motors.hysteresis_steps,
            )
            for _ in range(3)
        ),
        pneumatics=PneumaticSim(
            p_max_kpa=config.pneumatics.p_max_kpa,
            c_pump=config.pneumatics.c_pump,
            c_valve=config.pneumatics.c_valve,
            c_leak=config.pneumatics.c_leak,
        ),
        backlash=config.backlash,
        mount_offset_steps=offset_steps,
    )
    plant.preset_steps(home_steps)

    # Publisher ids sort in firing order; drivers that publish between
    # ticks (orchestrator, harness) use the n9x range so same-stamp
    # envelope order always matches execution order.
    scheduler = Scheduler(clock)
    scheduler.every(config.clock_tick_ms, "plant",
                    lambda now: plant.tick(now, config.clock_tick_ms))

    sensor = SensorNode(
        bus,
        plant.pneumatics,
        node_id="n01-sensor",
        resolution_kpa=config.pressure.sensor_resolution_kpa,
        period_ms=config.pressure.sensor_period_ms,
    )
    scheduler.every(config.pressure.sensor_period_ms, "sensor", sensor.step)

    arm = ArmControllerNode(bus, plant, node_id="n02-arm_controller")
    scheduler.every(config.clock_tick_ms, "arm_controller", arm.step)

    pressure = PressureControllerNode(
        bus,
        plant.pneumatics,
        node_id="n03-pressure_controller",
        gains=config.pid,
        watchdog_ms=config.pressure.watchdog_ms,
        release_threshold_kpa=config.pressure.release_threshold_kpa,
        pwm_period_ms=config.pressure.pwm_period_ms,
        pulsed_pwm=config.pressure.pwm_mode == "pulsed",
        default_dt_s=config.pressure.sensor_period_ms / 1000.0,
    )
    scheduler.every(config.clock_tick_ms, "pressure_controller", pressure.step)

    return System(
        config=config,
        clock=clock,
        bus=bus,
        plant=plant,
        scheduler=scheduler,
        sensor=sensor,
        arm=arm,
        pressure=pressure,
        home_steps=home_steps,
        trace=trace,
    )
