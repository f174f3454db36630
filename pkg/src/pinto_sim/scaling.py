"""Work-over-stroke jump height and how it changes with robot size.

If every length scales by ``k``, the mass goes as ``k**3`` and the leg stroke
and moment arms as ``k``. A motor torque that scales as ``k**alpha`` then gives
a foot force ``~ k**(alpha - 1)`` and a jump height
``force * stroke / (m g) ~ k**(alpha - 3)``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError

__all__ = ["ScalingModel", "jump_height", "scaled_height", "G_STANDARD"]

G_STANDARD = 9.81
ALPHA_RANGE = (1.5, 4.5)


@dataclass(frozen=True)
class ScalingModel:
    alpha: float = 3.0
    reference_length: float = 0.118
    reference_height: float = 0.3216

    def __post_init__(self):
        lo, hi = ALPHA_RANGE
        if not lo <= self.alpha <= hi:
            raise DomainError(f"alpha={self.alpha!r} outside [{lo}, {hi}]")
        if not (self.reference_length > 0 and self.reference_height >= 0):
            raise DomainError("reference length must be positive and height non-negative")


def jump_height(force: float, stroke: float, mass: float, gravity: float = G_STANDARD) -> float:
    """Apex above the start of the stroke for a constant push ``force``."""
    if not (force > 0 and stroke > 0 and mass > 0):
        raise DomainError("force, stroke and mass must be positive")
    return force * stroke / (mass * gravity)


def scaled_height(model: ScalingModel, scale: float) -> float:
    if not scale > 0:
        raise DomainError("scale must be positive")
    if scale == 1.0:
        return model.reference_height
    return model.reference_height * scale ** (model.alpha - 3.0)
