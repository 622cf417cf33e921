"""Configuration loading and validation.

The whole stack is configured from one JSON document.  Loading is
strict: unknown keys are rejected so typos fail loudly, and numeric
ranges are checked here rather than deep inside the simulation.
Omitting the file (or any key) yields the documented defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

from .control import PidGains
from .kinematics import ArmGeometry, StepGrid
from .plant import BacklashConfig


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class MotorConfig:
    rate_sps: float = 500.0
    hysteresis_steps: int = 2


@dataclass(frozen=True)
class PneumaticConfig:
    p_max_kpa: float = 58.7
    c_pump: float = 8.0
    c_valve: float = 0.5
    c_leak: float = 0.0


@dataclass(frozen=True)
class PressureConfig:
    band_halfwidth_kpa: float = 1.0
    sensor_period_ms: int = 10
    sensor_resolution_kpa: float = 0.1
    watchdog_ms: int = 500
    release_threshold_kpa: float = 1.0
    pwm_period_ms: int = 10
    pwm_mode: str = "average"  # or "pulsed"


@dataclass(frozen=True)
class HomeConfig:
    theta_base_deg: float = 0.0
    theta1_deg: float = 65.0
    theta2_deg: float = 90.0


@dataclass(frozen=True)
class HarnessConfig:
    n_moves: int = 6
    distance_mm: float = 500.0
    rotation_deg: float = 90.0
    rotation_repeats: int = 3
    # true mechanical home offset per joint, deg; models a miscalibrated mount
    start_offset_deg: tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Config:
    geometry: ArmGeometry = field(default_factory=ArmGeometry)
    step_grid: StepGrid = field(default_factory=StepGrid)
    pid: PidGains = field(default_factory=PidGains)
    pressure: PressureConfig = field(default_factory=PressureConfig)
    motors: MotorConfig = field(default_factory=MotorConfig)
    pneumatics: PneumaticConfig = field(default_factory=PneumaticConfig)
    backlash: BacklashConfig = field(default_factory=BacklashConfig)
    home: HomeConfig = field(default_factory=HomeConfig)
    harness: HarnessConfig = field(default_factory=HarnessConfig)
    clock_tick_ms: int = 1
    instruction_timeout_ms: int = 30000
    trace_path: str | None = None


def default_dict() -> dict[str, Any]:
    """The full default configuration as a plain JSON-ready dict."""
    return {
        "geometry": {
            "l1_mm": 150.0,
            "l2_mm": 150.0,
            "base_height_mm": 100.0,
            "reach_offset_mm": 0.0,
            "limit_base_deg": [-180.0, 180.0],
            "limit_theta1_deg": [0.0, 90.0],
            "limit_theta2_deg": [0.0, 90.0],
        },
        "step_grid": {"full_step_deg": 1.8, "microstep_divisor": 16},
        "pid": {"kp": 0.05, "ki": 0.02, "kd": 0.0, "integral_max": 25.0},
        "pressure": {
            "band_halfwidth_kpa": 1.0,
            "sensor_period_ms": 10,
            "sensor_resolution_kpa": 0.1,
            "watchdog_ms": 500,
            "release_threshold_kpa": 1.0,
            "pwm_period_ms": 10,
            "pwm_mode": "average",
        },
        "plant": {
            "motors": {"rate_sps": 500.0, "hysteresis_steps": 2},
            "pneumatics": {"p_max_kpa": 58.7, "c_pump": 8.0, "c_valve": 0.5, "c_leak": 0.0},
            "backlash": {"horizontal_mm": 3.5, "vertical_mm": 1.5, "perpendicular_mm": 10.0},
        },
        "home": {"theta_base_deg": 0.0, "theta1_deg": 65.0, "theta2_deg": 90.0},
        "harness": {
            "n_moves": 6,
            "distance_mm": 500.0,
            "rotation_deg": 90.0,
            "rotation_repeats": 3,
            "start_offset_deg": [0.0, 0.0, 0.0],
        },
        "clock_tick_ms": 1,
        "instruction_timeout_ms": 30000,
        "trace_path": None,
    }


def _take(section: Mapping[str, Any], context: str, allowed: set[str]) -> dict[str, Any]:
    if not isinstance(section, Mapping):
        raise ConfigError(f"{context}: expected an object")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"{context}: unknown keys {sorted(unknown)}")
    return dict(section)


def _number(section: Mapping[str, Any], context: str, key: str, default: float,
            minimum: float | None = None, positive: bool = False) -> float:
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{context}.{key}: expected a number")
    value = float(value)
    if positive and value <= 0:
        raise ConfigError(f"{context}.{key}: must be positive")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{context}.{key}: must be at least {minimum}")
    return value


def _integer(section: Mapping[str, Any], context: str, key: str, default: int,
             minimum: int | None = None) -> int:
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{context}.{key}: expected an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{context}.{key}: must be at least {minimum}")
    return value


def _limit_pair(section: Mapping[str, Any], context: str, key: str,
                default: tuple[float, float]) -> tuple[float, float]:
    value = section.get(key, list(default))
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        raise ConfigError(f"{context}.{key}: expected [min, max]")
    lo, hi = float(value[0]), float(value[1])
    if not lo < hi:
        raise ConfigError(f"{context}.{key}: min must be below max")
    return (lo, hi)


def from_dict(data: Mapping[str, Any]) -> Config:
    top = _take(data, "config", {
        "geometry", "step_grid", "pid", "pressure", "plant", "home",
        "harness", "clock_tick_ms", "instruction_timeout_ms", "trace_path",
    })

    geo = _take(top.get("geometry", {}), "geometry", {
        "l1_mm", "l2_mm", "base_height_mm", "reach_offset_mm",
        "limit_base_deg", "limit_theta1_deg", "limit_theta2_deg",
    })
    geometry = ArmGeometry(
        l1_mm=_number(geo, "geometry", "l1_mm", 150.0, positive=True),
        l2_mm=_number(geo, "geometry", "l2_mm", 150.0, positive=True),
        base_height_mm=_number(geo, "geometry", "base_height_mm", 100.0),
        reach_offset_mm=_number(geo, "geometry", "reach_offset_mm", 0.0, minimum=0.0),
        limit_base_deg=_limit_pair(geo, "geometry", "limit_base_deg", (-180.0, 180.0)),
        limit_theta1_deg=_limit_pair(geo, "geometry", "limit_theta1_deg", (0.0, 90.0)),
        limit_theta2_deg=_limit_pair(geo, "geometry", "limit_theta2_deg", (0.0, 90.0)),
    )

    grid_section = _take(top.get("step_grid", {}), "step_grid",
                         {"full_step_deg", "microstep_divisor"})
    try:
        step_grid = StepGrid(
            full_step_deg=_number(grid_section, "step_grid", "full_step_deg", 1.8, positive=True),
            microstep_divisor=_integer(grid_section, "step_grid", "microstep_divisor", 16),
        )
    except ValueError as exc:
        raise ConfigError(f"step_grid: {exc}") from None

    pid_section = _take(top.get("pid", {}), "pid", {"kp", "ki", "kd", "integral_max"})
    pid = PidGains(
        kp=_number(pid_section, "pid", "kp", 0.05),
        ki=_number(pid_section, "pid", "ki", 0.02),
        kd=_number(pid_section, "pid", "kd", 0.0),
        integral_max=_number(pid_section, "pid", "integral_max", 25.0, minimum=0.0),
    )

    pr = _take(top.get("pressure", {}), "pressure", {
        "band_halfwidth_kpa", "sensor_period_ms", "sensor_resolution_kpa",
        "watchdog_ms", "release_threshold_kpa", "pwm_period_ms", "pwm_mode",
    })
    pwm_mode = pr.get("pwm_mode", "average")
    if pwm_mode not in ("average", "pulsed"):
        raise ConfigError("pressure.pwm_mode: must be 'average' or 'pulsed'")
    pressure = PressureConfig(
        band_halfwidth_kpa=_number(pr, "pressure", "band_halfwidth_kpa", 1.0, minimum=0.0),
        sensor_period_ms=_integer(pr, "pressure", "sensor_period_ms", 10, minimum=1),
        sensor_resolution_kpa=_number(pr, "pressure", "sensor_resolution_kpa", 0.1, positive=True),
        watchdog_ms=_integer(pr, "pressure", "watchdog_ms", 500, minimum=1),
        release_threshold_kpa=_number(pr, "pressure", "release_threshold_kpa", 1.0, minimum=0.0),
        pwm_period_ms=_integer(pr, "pressure", "pwm_period_ms", 10, minimum=1),
        pwm_mode=pwm_mode,
    )

    plant_section = _take(top.get("plant", {}), "plant", {"motors", "pneumatics", "backlash"})
    mo = _take(plant_section.get("motors", {}), "plant.motors", {"rate_sps", "hysteresis_steps"})
    motors = MotorConfig(
        rate_sps=_number(mo, "plant.motors", "rate_sps", 500.0, positive=True),
        hysteresis_steps=_integer(mo, "plant.motors", "hysteresis_steps", 2, minimum=0),
    )
    pn = _take(plant_section.get("pneumatics", {}), "plant.pneumatics",
               {"p_max_kpa", "c_pump", "c_valve", "c_leak"})
    pneumatics = PneumaticConfig(
        p_max_kpa=_number(pn, "plant.pneumatics", "p_max_kpa", 58.7, positive=True),
        c_pump=_number(pn, "plant.pneumatics", "c_pump", 8.0, minimum=0.0),
        c_valve=_number(pn, "plant.pneumatics", "c_valve", 0.5, minimum=0.0),
        c_leak=_number(pn, "plant.pneumatics", "c_leak", 0.0, minimum=0.0),
    )
    bl = _take(plant_section.get("backlash", {}), "plant.backlash",
               {"horizontal_mm", "vertical_mm", "perpendicular_mm"})
    backlash = BacklashConfig(
        horizontal_mm=_number(bl, "plant.backlash", "horizontal_mm", 3.5, minimum=0.0),
        vertical_mm=_number(bl, "plant.backlash", "vertical_mm", 1.5, minimum=0.0),
        perpendicular_mm=_number(bl, "plant.backlash", "perpendicular_mm", 10.0, minimum=0.0),
    )

    home_section = _take(top.get("home", {}), "home",
                         {"theta_base_deg", "theta1_deg", "theta2_deg"})
    home = HomeConfig(
        theta_base_deg=_number(home_section, "home", "theta_base_deg", 0.0),
        theta1_deg=_number(home_section, "home", "theta1_deg", 65.0),
        theta2_deg=_number(home_section, "home", "theta2_deg", 90.0),
    )

    ha = _take(top.get("harness", {}), "harness", {
        "n_moves", "distance_mm", "rotation_deg", "rotation_repeats", "start_offset_deg",
    })
    offsets = ha.get("start_offset_deg", [0.0, 0.0, 0.0])
    if (
        not isinstance(offsets, (list, tuple))
        or len(offsets) != 3
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in offsets)
    ):
        raise ConfigError("harness.start_offset_deg: expected three numbers")
    harness = HarnessConfig(
        n_moves=_integer(ha, "harness", "n_moves", 6, minimum=1),
        distance_mm=_number(ha, "harness", "distance_mm", 500.0, positive=True),
        rotation_deg=_number(ha, "harness", "rotation_deg", 90.0, positive=True),
        rotation_repeats=_integer(ha, "harness", "rotation_repeats", 3, minimum=1),
        start_offset_deg=tuple(float(v) for v in offsets),
    )

    trace_path = top.get("trace_path")
    if trace_path is not None and not isinstance(trace_path, str):
        raise ConfigError("trace_path: expected a string or null")

    try:
        return Config(
            geometry=geometry,
            step_grid=step_grid,
            pid=pid,
            pressure=pressure,
            motors=motors,
            pneumatics=pneumatics,
            backlash=backlash,
            home=home,
            harness=harness,
            clock_tick_ms=_integer(top, "config", "clock_tick_ms", 1, minimum=1),
            instruction_timeout_ms=_integer(top, "config", "instruction_timeout_ms", 30000, minimum=1),
            trace_path=trace_path,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load(path: str | None) -> Config:
    """Load a config file, or the defaults when ``path`` is None."""
    if path is None:
        return from_dict({})
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return from_dict(data)
