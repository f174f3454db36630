"""Latch automaton and the three ways of coupling input and output links.

Angles follow the leg's cooperative coordinate: both the input link (driven by
the string) and the output link (driving the leg) advance in the extension
direction. The spring is compressed by ``psi = phi_in - phi_out``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Sequence, Union

from .errors import DomainError
from .spring import SpringAssembly, spring_torque

__all__ = [
    "ActuationMode",
    "LatchPhase",
    "LatchEvent",
    "LatchState",
    "Coupling",
    "latch_step",
    "coupling_torque",
]


class ActuationMode(enum.Enum):
    RIGID = "rigid"
    SEA = "sea"
    PEA = "pea"

    @classmethod
    def parse(cls, value) -> "ActuationMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown actuation mode {value!r}; expected rigid, sea or pea") from None


class LatchPhase(enum.Enum):
    LATCHED = "latched"
    RELEASED = "released"


class LatchEvent(enum.Enum):
    NONE = "none"
    RELEASE = "release"
    RESET = "reset"


@dataclass(frozen=True)
class LatchState:
    """State of the (paired) latch holding the output links.

    ``latch_angle`` is the output angle at which the latch catches; it must not
    exceed ``reset_angle``, otherwise the latch could never be re-armed.
    """

    phase: LatchPhase = LatchPhase.LATCHED
    armed: bool = True
    release_angle: float = 0.0
    reset_angle: float = 0.0
    latch_angle: float = 0.0

    def __post_init__(self):
        if not isinstance(self.phase, LatchPhase):
            object.__setattr__(self, "phase", LatchPhase(self.phase))
        if self.latch_angle > self.reset_angle:
            raise DomainError("latch_angle must not exceed reset_angle")

    @property
    def latched(self) -> bool:
        return self.phase is LatchPhase.LATCHED

    def within(self, lo: float, hi: float) -> None:
        """Check release and reset angles against link travel ``[lo, hi]``."""
        for name in ("release_angle", "reset_angle", "latch_angle"):
            v = getattr(self, name)
            if not lo <= v <= hi:
                raise DomainError(f"{name}={v!r} outside link travel [{lo}, {hi}]")


def latch_step(state: LatchState, phi_in: float, phi_out: float):
    """Advance the latch given the current link angles.

    Returns ``(new_state, event)``; at most one event fires per call.
    """
    if state.latched:
        if phi_in >= state.release_angle:
            return replace(state, phase=LatchPhase.RELEASED, armed=False), LatchEvent.RELEASE
        return state, LatchEvent.NONE
    if not state.armed:
        if phi_out <= state.reset_angle:
            return replace(state, armed=True), LatchEvent.RESET
        return state, LatchEvent.NONE
    if phi_out <= state.latch_angle:
        return replace(state, phase=LatchPhase.LATCHED), LatchEvent.NONE
    return state, LatchEvent.NONE


@dataclass(frozen=True)
class Coupling:
    """Torques exchanged through the coupling.

    ``output`` is the torque pushing the output link forward and ``input`` the
    reaction on the input link. When ``locked`` is set the output does not
    move on its own: in Rigid mode it follows the input, in latched PEA it is
    held by the latch, which absorbs ``output``.
    """

    output: float
    input: float
    locked: bool
    locked_to: str = ""


Springs = Union[SpringAssembly, Sequence[SpringAssembly]]


def _spring_sum(springs: Springs, psi: float) -> float:
    if isinstance(springs, SpringAssembly):
        springs = (springs,)
    total = 0.0
    for assy in springs:
        g = assy.geometry
        phi = g.phi_rest - psi
        if not g.phi_min <= phi <= g.phi_rest:
            raise DomainError(
                f"relative compression {psi:.6g} rad leaves the spring range "
                f"[0, {g.phi_rest - g.phi_min:.6g}]")
        total += spring_torque(assy, phi)
    return total


def coupling_torque(mode: ActuationMode, state: LatchState, assy: Springs,
                    phi_in: float, phi_out: float) -> Coupling:
    mode = ActuationMode.parse(mode)
    if mode is ActuationMode.RIGID:
        return Coupling(0.0, 0.0, True, "input")
    tau = _spring_sum(assy, phi_in - phi_out)
    if mode is ActuationMode.PEA and state.latched:
        return Coupling(tau, -tau, True, "ground")
    return Coupling(tau, -tau, False)
