"""Brushless motor, twisted string transmission and retraction band."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DomainError, OverTwistError

__all__ = [
    "MotorSpec",
    "TwistedStringActuator",
    "AntagonistBand",
    "StringState",
    "MotorOutput",
    "tsa_contraction",
    "tsa_ratio",
    "string_coupling",
    "motor_torque",
    "electrical_power",
    "helix_contraction",
]


@dataclass(frozen=True)
class MotorSpec:
    """DC model of a brushless motor driven from a fixed bus."""

    kv: float = 2650.0
    winding_resistance: float = 0.1
    v_bus: float = 11.1
    i_max: float = 30.0
    rotor_inertia: float = 2e-6

    def __post_init__(self):
        for name in ("kv", "winding_resistance", "v_bus", "i_max", "rotor_inertia"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")

    @property
    def kt(self) -> float:
        """Torque constant in N m/A."""
        return 60.0 / (2.0 * math.pi * self.kv)

    @property
    def kv_rad(self) -> float:
        """Speed constant in rad/s per volt."""
        return self.kv * 2.0 * math.pi / 60.0

    def aggregate(self, n: int = 2) -> "MotorSpec":
        """``n`` identical motors on one shaft: same speed, n times the
        current limit and rotor inertia, same voltage. The winding
        resistance divides by ``n`` so the stall torque scales with ``n``."""
        return replace(self, winding_resistance=self.winding_resistance / n,
                       i_max=self.i_max * n, rotor_inertia=self.rotor_inertia * n)


@dataclass(frozen=True)
class TwistedStringActuator:
    string_length: float = 0.100
    string_radius: float = 0.55e-3
    pulley_radius: float = 0.010
    theta_0: float = 15.0
    theta_m: float = 15.0

    def __post_init__(self):
        for name in ("string_length", "string_radius", "pulley_radius", "theta_0"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.theta_m < 0:
            raise DomainError("theta_m must be non-negative")
        _check_twist(self, self.theta_m)

    @property
    def max_twist(self) -> float:
        return self.string_length / self.string_radius


@dataclass(frozen=True)
class AntagonistBand:
    """Rubber band pulling the input link back toward ``rest_angle``."""

    stiffness: float = 0.05
    rest_angle: float = 0.0

    def __post_init__(self):
        if self.stiffness < 0:
            raise DomainError("band stiffness must be non-negative")

    def torque(self, phi_in: float) -> float:
        # a band only pulls, so it is slack below its rest angle
        return -self.stiffness * max(phi_in - self.rest_angle, 0.0)


def _check_twist(tsa, theta):
    if theta < 0:
        raise DomainError(f"twist angle {theta!r} is negative")
    if theta * tsa.string_radius >= tsa.string_length:
        raise OverTwistError(
            f"twist {theta:.6g} rad with r_s={tsa.string_radius} reaches the string length")


def tsa_contraction(tsa: TwistedStringActuator, theta: float) -> float:
    """Shortening of the string after ``theta`` radians of twist."""
    _check_twist(tsa, theta)
    L, r = tsa.string_length, tsa.string_radius
    tr = theta * r
    # L - sqrt(L^2 - x^2) written without cancellation
    return tr * tr / (L + math.sqrt(L * L - tr * tr))


def tsa_ratio(tsa: TwistedStringActuator, theta: float) -> float:
    """``d(contraction)/d(theta)``; the inverse of the mechanical advantage."""
    _check_twist(tsa, theta)
    L, r = tsa.string_length, tsa.string_radius
    return theta * r * r / math.sqrt(L * L - (theta * r) ** 2)


def helix_contraction(tsa: TwistedStringActuator, theta: float, segments: int = 10000) -> float:
    """Contraction from a discretized helix: the string is split into straight
    pieces, each spanning ``theta/segments`` of twist around the axis."""
    _check_twist(tsa, theta)
    piece = tsa.string_length / segments
    chord = 2.0 * tsa.string_radius * math.sin(theta / (2.0 * segments))
    axial = segments * math.sqrt(piece * piece - chord * chord)
    return tsa.string_length - axial


@dataclass(frozen=True)
class StringState:
    tension: float
    slack: bool
    contraction: float


def string_coupling(tsa: TwistedStringActuator, theta_m: float, phi_in: float,
                    phi_in0: float, motor_torque: float = 0.0) -> StringState:
    """Tension and slack state of the string at a given configuration.

    When the input link lags the string command the string is taut and
    carries the static tension ``motor_torque / G``. When the link has run
    ahead of the string it is slack.
    """
    dx = tsa_contraction(tsa, theta_m)
    travel = tsa.pulley_radius * (phi_in - phi_in0)
    if travel > dx:
        return StringState(0.0, True, dx)
    g = tsa_ratio(tsa, theta_m)
    if g == 0.0 or motor_torque <= 0.0:
        return StringState(0.0, False, dx)
    return StringState(motor_torque / g, False, dx)


@dataclass(frozen=True)
class MotorOutput:
    torque: float
    current: float


def motor_torque(motor: MotorSpec, duty: float, omega: float) -> MotorOutput:
    """Shaft torque and winding current at ``duty`` and speed ``omega``."""
    if not 0.0 <= duty <= 1.0:
        raise DomainError(f"duty {duty!r} outside [0, 1]")
    i = (duty * motor.v_bus - omega / motor.kv_rad) / motor.winding_resistance
    i = min(max(i, -motor.i_max), motor.i_max)
    return MotorOutput(motor.kt * i, i)


def electrical_power(motor: MotorSpec, duty: float, current: float) -> float:
    """Power drawn from the DC bus, ``duty * V * |I|``."""
    if not 0.0 <= duty <= 1.0:
        raise DomainError(f"duty {duty!r} outside [0, 1]")
    return duty * motor.v_bus * abs(current)
