"""Analytical kinematics for a two-link arm on a rotating base.

Angle conventions (all degrees, all ground-referenced):

* ``theta_base_deg`` rotates the whole arm about the vertical axis.
* ``theta1_deg`` is the elevation of the major arm above horizontal.
* ``theta2_deg`` is the depression of the minor arm below horizontal.

A parallelogram linkage keeps the minor arm referenced to ground, so the
two in-plane angles are independent and the end effector platform stays
level.  In the vertical plane of the arm:

    r = l1*cos(theta1) + l2*cos(theta2) + reach_offset
    z = base_height + l1*sin(theta1) - l2*sin(theta2)

and the base rotation turns (r, 0) into (x, y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class Unreachable(Exception):
    """Target lies outside the reachable annulus of the arm."""


class LimitViolation(Exception):
    """A joint solution exists but violates the configured joint limits."""


@dataclass(frozen=True)
class JointAngles:
    theta_base_deg: float
    theta1_deg: float
    theta2_deg: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.theta_base_deg, self.theta1_deg, self.theta2_deg)


@dataclass(frozen=True)
class Pose3:
    x_mm: float
    y_mm: float
    z_mm: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x_mm, self.y_mm, self.z_mm)

    def distance_to(self, other: "Pose3") -> float:
        return math.dist(self.as_tuple(), other.as_tuple())


@dataclass(frozen=True)
class ArmGeometry:
    l1_mm: float = 150.0
    l2_mm: float = 150.0
    base_height_mm: float = 100.0
    reach_offset_mm: float = 0.0
    # [min, max] degrees per joint; base covers the full turn by default,
    # theta1/theta2 are mechanically boxed to one quadrant.
    limit_base_deg: tuple[float, float] = (-180.0, 180.0)
    limit_theta1_deg: tuple[float, float] = (0.0, 90.0)
    limit_theta2_deg: tuple[float, float] = (0.0, 90.0)

    def __post_init__(self) -> None:
        if self.l1_mm <= 0 or self.l2_mm <= 0:
            raise ValueError("link lengths must be positive")
        for lo, hi in (self.limit_base_deg, self.limit_theta1_deg, self.limit_theta2_deg):
            if not lo < hi:
                raise ValueError("joint limits must be a non-degenerate [min, max] pair")

    def check_limits(self, angles: JointAngles) -> None:
        pairs = (
            ("base", angles.theta_base_deg, self.limit_base_deg),
            ("theta1", angles.theta1_deg, self.limit_theta1_deg),
            ("theta2", angles.theta2_deg, self.limit_theta2_deg),
        )
        for name, value, (lo, hi) in pairs:
            if not lo <= value <= hi:
                raise LimitViolation(
                    f"{name} = {value:.4f} deg outside [{lo:.4f}, {hi:.4f}]"
                )


_MICROSTEP_DIVISORS = (1, 2, 4, 8, 16, 32)


@dataclass(frozen=True)
class StepGrid:
    """Angular grid reachable by the steppers at a given microstep divisor."""

    full_step_deg: float = 1.8
    microstep_divisor: int = 16

    def __post_init__(self) -> None:
        if self.full_step_deg <= 0:
            raise ValueError("full step must be positive")
        if self.microstep_divisor not in _MICROSTEP_DIVISORS:
            raise ValueError(
                f"microstep divisor must be one of {_MICROSTEP_DIVISORS}"
            )

    @property
    def resolution_deg(self) -> float:
        return self.full_step_deg / self.microstep_divisor


@dataclass(frozen=True)
class StepTarget:
    """Quantized joint target: microstep indices plus the realized angles."""

    steps: tuple[int, int, int]  # (base, shoulder, minor)
    realized: JointAngles
    realized_pose: Pose3


def forward_kinematics(angles: JointAngles, geometry: ArmGeometry) -> Pose3:
    t_b = math.radians(angles.theta_base_deg)
    t_1 = math.radians(angles.theta1_deg)
    t_2 = math.radians(angles.theta2_deg)
    r = (
        geometry.l1_mm * math.cos(t_1)
        + geometry.l2_mm * math.cos(t_2)
        + geometry.reach_offset_mm
    )
    z = geometry.base_height_mm + geometry.l1_mm * math.sin(t_1) - geometry.l2_mm * math.sin(t_2)
    return Pose3(r * math.cos(t_b), r * math.sin(t_b), z)


# Solutions within this sliver of a joint limit are snapped onto it, so
# a pose computed at a limit round-trips instead of failing the check.
# The width covers the acos conditioning loss near full extension,
# where one ulp of planar distance scatters the angles a few
# millionths of a degree.
_LIMIT_SNAP_DEG = 1e-5


def _snap_into(value: float, limits: tuple[float, float]) -> float:
    lo, hi = limits
    if lo - _LIMIT_SNAP_DEG <= value < lo:
        return lo
    if hi < value <= hi + _LIMIT_SNAP_DEG:
        return hi
    return value


def inverse_kinematics(target: Pose3, geometry: ArmGeometry) -> JointAngles:
    """Solve for the elbow-up joint angles reaching ``target``.

    Raises ``Unreachable`` when the target lies outside the annulus
    swept by the two links and ``LimitViolation`` when the unique
    elbow-up solution falls outside the configured joint limits.
    """
    l1, l2 = geometry.l1_mm, geometry.l2_mm
    theta_base = math.degrees(math.atan2(target.y_mm, target.x_mm))
    r = math.hypot(target.x_mm, target.y_mm) - geometry.reach_offset_mm
    h = target.z_mm - geometry.base_height_mm
    d = math.hypot(r, h)
    # The slack admits annulus-boundary targets (full extension, full
    # fold) that land an ulp outside after coordinate round trips.
    slack = (l1 + l2) * 1e-12
    if d > l1 + l2 + slack or d < abs(l1 - l2) - slack or d == 0.0:
        raise Unreachable(
            f"planar distance {d:.3f} mm outside [{abs(l1 - l2):.3f}, {l1 + l2:.3f}]"
        )
    # Clamp guards boundary targets where rounding pushes the cosine
    # argument an ulp outside [-1, 1].
    cos_gamma = (l1 * l1 + d * d - l2 * l2) / (2.0 * l1 * d)
    gamma = math.acos(max(-1.0, min(1.0, cos_gamma)))
    # Snap the shoulder first and derive the minor arm from the snapped
    # value: near full extension the two partials align, so the second
    # joint absorbs the snap and the pose fit survives.  If the minor
    # arm itself needed snapping, re-fit the shoulder the same way.
    theta_1 = _snap_into(math.degrees(math.atan2(h, r) + gamma), geometry.limit_theta1_deg)
    t_1 = math.radians(theta_1)
    raw_2 = math.degrees(-math.atan2(h - l1 * math.sin(t_1), r - l1 * math.cos(t_1)))
    theta_2 = _snap_into(raw_2, geometry.limit_theta2_deg)
    if theta_2 != raw_2:
        t_2 = math.radians(theta_2)
        theta_1 = _snap_into(
            math.degrees(math.atan2(h + l2 * math.sin(t_2), r - l2 * math.cos(t_2))),
            geometry.limit_theta1_deg,
        )
    angles = JointAngles(
        _snap_into(theta_base, geometry.limit_base_deg),
        theta_1,
        theta_2,
    )
    geometry.check_limits(angles)
    return angles


def _round_half_toward_zero(x: float) -> int:
    # Nearest integer with exact .5 ties resolved toward zero.
    return int(math.copysign(math.ceil(abs(x) - 0.5), x))


def angles_to_steps(angles: JointAngles, grid: StepGrid) -> tuple[int, int, int]:
    res = grid.resolution_deg
    return (
        _round_half_toward_zero(angles.theta_base_deg / res),
        _round_half_toward_zero(angles.theta1_deg / res),
        _round_half_toward_zero(angles.theta2_deg / res),
    )


def steps_to_angles(steps: tuple[int, int, int], grid: StepGrid) -> JointAngles:
    res = grid.resolution_deg
    return JointAngles(steps[0] * res, steps[1] * res, steps[2] * res)


def quantize(angles: JointAngles, grid: StepGrid, geometry: ArmGeometry) -> StepTarget:
    """Snap joint angles to the nearest microstep grid point."""
    steps = angles_to_steps(angles, grid)
    realized = steps_to_angles(steps, grid)
    return StepTarget(steps, realized, forward_kinematics(realized, geometry))


def single_step_displacement(
    angles: JointAngles, geometry: ArmGeometry, grid: StepGrid
) -> float:
    """Smallest end-effector motion produced by one full step on either arm joint.

    Evaluates the four single-full-step perturbations (+/- on theta1 and
    theta2) and returns the minimum Cartesian displacement, a lower bound
    on the positioning granularity at this pose.
    """
    here = forward_kinematics(angles, geometry)
    step = grid.full_step_deg
    candidates = []
    for d1, d2 in ((step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)):
        perturbed = JointAngles(
            angles.theta_base_deg, angles.theta1_deg + d1, angles.theta2_deg + d2
        )
        candidates.append(forward_kinematics(perturbed, geometry).distance_to(here))
    return min(candidates)
