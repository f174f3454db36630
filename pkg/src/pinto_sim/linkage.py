"""Planar kinematics of the spring links and the coaxial five-bar leg.

Two independent pieces of geometry live here:

* the two-link spring compressor (input arm ``L1`` and output arm ``L2``
  pinned at a shared pivot, strip spanning the chord between the arm tips);
* the coaxial five-bar CEFD with a collinear extension ``G`` on link E.

Angles are radians. The hip axis is the origin, ``y`` points up and the foot
hangs below the hip.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, SingularityError, UnreachableError

__all__ = [
    "SpringLinkGeometry",
    "LegGeometry",
    "WorkspaceSample",
    "chord_length",
    "chord_moment_arm",
    "leg_forward_kinematics",
    "leg_junction",
    "leg_jacobian",
    "cooperative_joints",
    "leg_extension",
    "transmission_ratio",
    "workspace_sample",
]

# distance to an unreachable boundary below which the transmission ratio is refused
SINGULAR_MARGIN = 1e-3


@dataclass(frozen=True)
class SpringLinkGeometry:
    """Arm lengths and angle limits of one spring compressor."""

    L1: float
    L2: float
    phi_rest: float
    phi_min: float

    def __post_init__(self):
        if not (self.L1 > 0 and self.L2 > 0):
            raise DomainError("L1 and L2 must be positive")
        if not (0 < self.phi_min < self.phi_rest <= math.pi):
            raise DomainError("need 0 < phi_min < phi_rest <= pi")

    @property
    def R(self) -> float:
        return self.L2 / self.L1


def chord_length(geom: SpringLinkGeometry, phi: float) -> float:
    """Distance between the two arm tips at included angle ``phi``."""
    if not 0.0 <= phi <= math.pi:
        raise DomainError(f"phi={phi!r} outside [0, pi]")
    L1, L2 = geom.L1, geom.L2
    # clamp guards the cancellation at phi=0 when L1 == L2
    return math.sqrt(max(L1 * L1 + L2 * L2 - 2.0 * L1 * L2 * math.cos(phi), 0.0))


def chord_moment_arm(geom: SpringLinkGeometry, phi: float) -> float:
    """Perpendicular distance from the shared pivot to the chord.

    Multiplying the strip's axial force by this arm gives the torque about the
    pivot. It is also ``dc/dphi``, which is what makes the torque and energy
    views of the spring agree.
    """
    if not 0.0 < phi < math.pi:
        raise DomainError(f"phi={phi!r} outside the open interval (0, pi)")
    return geom.L1 * geom.L2 * math.sin(phi) / chord_length(geom, phi)


@dataclass(frozen=True)
class LegGeometry:
    """Link lengths and joint limits of the coaxial five-bar leg.

    ``elbow=+1`` puts the E-F junction on the right-hand side of the
    knee-C to knee-D direction. With C on the left of the hip, as in the
    default joint ranges, that is the branch pointing the foot away from the
    body; ``-1`` selects the mirror branch. The cooperative
    coordinate ``s`` maps to ``(q_C, q_D) = (q0 + s, q0' - s)`` where ``q0``
    and ``q0'`` are the midpoints of the joint ranges.
    """

    l_C: float = 0.140
    l_D: float = 0.140
    l_E: float = 0.150
    l_F: float = 0.150
    l_G: float = 0.0
    elbow: int = 1
    q_C_range: tuple = (-math.pi / 2 - 1.35, -math.pi / 2 - 0.8)
    q_D_range: tuple = (-math.pi / 2 + 0.8, -math.pi / 2 + 1.35)

    def __post_init__(self):
        for name in ("l_C", "l_D", "l_E", "l_F"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.l_G < 0:
            raise DomainError("l_G must be non-negative")
        if self.elbow not in (1, -1):
            raise DomainError("elbow must be +1 or -1")
        for name in ("q_C_range", "q_D_range"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise DomainError(f"{name} must be a non-empty interval")
        # tuples survive JSON round trips as lists
        object.__setattr__(self, "q_C_range", tuple(float(v) for v in self.q_C_range))
        object.__setattr__(self, "q_D_range", tuple(float(v) for v in self.q_D_range))

    @property
    def q0(self) -> tuple[float, float]:
        return (0.5 * sum(self.q_C_range), 0.5 * sum(self.q_D_range))

    @property
    def s_range(self) -> tuple[float, float]:
        """Cooperative coordinate interval keeping both joints in range."""
        qc0, qd0 = self.q0
        lo = max(self.q_C_range[0] - qc0, qd0 - self.q_D_range[1])
        hi = min(self.q_C_range[1] - qc0, qd0 - self.q_D_range[0])
        return (lo, hi)

    def scaled(self, k: float) -> "LegGeometry":
        return replace(self, l_C=k * self.l_C, l_D=k * self.l_D, l_E=k * self.l_E,
                       l_F=k * self.l_F, l_G=k * self.l_G)


def _knees(geom, q_C, q_D):
    pc = np.array([geom.l_C * math.cos(q_C), geom.l_C * math.sin(q_C)])
    pd = np.array([geom.l_D * math.cos(q_D), geom.l_D * math.sin(q_D)])
    return pc, pd


def leg_junction(geom: LegGeometry, q_C: float, q_D: float):
    """Knee points and the E-F junction. Returns ``(P_C, P_D, J)``."""
    pc, pd = _knees(geom, q_C, q_D)
    delta = pd - pc
    dist = math.hypot(delta[0], delta[1])
    if dist > geom.l_E + geom.l_F or dist < abs(geom.l_E - geom.l_F) or dist == 0.0:
        raise UnreachableError(
            f"five-bar cannot close: knee spacing {dist:.6g} m for l_E={geom.l_E}, l_F={geom.l_F}")
    a = (geom.l_E ** 2 - geom.l_F ** 2 + dist ** 2) / (2.0 * dist)
    h = math.sqrt(max(geom.l_E ** 2 - a * a, 0.0))
    u = delta / dist
    mid = pc + a * u
    # left normal of the C->D direction; elbow=+1 takes the right-hand side,
    # which keeps the branch continuous over the whole workspace
    perp = np.array([-u[1], u[0]])
    return pc, pd, mid - geom.elbow * h * perp


def leg_forward_kinematics(geom: LegGeometry, q_C: float, q_D: float) -> np.ndarray:
    """Foot position for joint angles ``(q_C, q_D)``."""
    pc, _, j = leg_junction(geom, q_C, q_D)
    return j + (geom.l_G / geom.l_E) * (j - pc)


def leg_jacobian(geom: LegGeometry, q_C: float, q_D: float) -> np.ndarray:
    """2x2 Jacobian of the foot position with respect to ``(q_C, q_D)``."""
    pc, pd, j = leg_junction(geom, q_C, q_D)
    rc = j - pc
    rd = j - pd
    det = rc[0] * rd[1] - rc[1] * rd[0]
    if abs(det) < 1e-12 * geom.l_E * geom.l_F:
        raise SingularityError("five-bar is at a singular configuration")
    e_c = geom.l_C * np.array([-math.sin(q_C), math.cos(q_C)])
    e_d = geom.l_D * np.array([-math.sin(q_D), math.cos(q_D)])
    A = np.array([rc, rd])
    dj_dc = np.linalg.solve(A, [rc @ e_c, 0.0])
    dj_dd = np.linalg.solve(A, [0.0, rd @ e_d])
    k = geom.l_G / geom.l_E
    return np.column_stack([(1 + k) * dj_dc - k * e_c, (1 + k) * dj_dd])


def cooperative_joints(geom: LegGeometry, s: float) -> tuple[float, float]:
    qc0, qd0 = geom.q0
    return qc0 + s, qd0 - s


def leg_extension(geom: LegGeometry, s: float) -> float:
    """Hip-to-foot distance along the cooperative extension path."""
    foot = leg_forward_kinematics(geom, *cooperative_joints(geom, s))
    return math.hypot(foot[0], foot[1])


def transmission_ratio(geom: LegGeometry, s: float) -> float:
    """Analytic ``d(extension)/ds`` in metres per radian."""
    for probe in (s - SINGULAR_MARGIN, s + SINGULAR_MARGIN):
        try:
            leg_junction(geom, *cooperative_joints(geom, probe))
        except UnreachableError as exc:
            raise SingularityError(f"s={s!r} is within {SINGULAR_MARGIN} rad of an unreachable boundary") from exc
    q_C, q_D = cooperative_joints(geom, s)
    foot = leg_forward_kinematics(geom, q_C, q_D)
    jac = leg_jacobian(geom, q_C, q_D)
    dfoot = jac[:, 0] - jac[:, 1]
    return float(foot @ dfoot / math.hypot(foot[0], foot[1]))


@dataclass
class WorkspaceSample:
    """Reachable foot points plus the two cooperative polylines.

    ``coop_same`` moves both joints in the same rotational sense (the leg
    pitches about the hip); ``coop_opposite`` moves them in opposite senses,
    which is the extension stroke used for jumping.
    """

    points: np.ndarray
    coop_same: np.ndarray
    coop_opposite: np.ndarray
    joints: np.ndarray = field(default=None, repr=False)


def _polyline(geom, s_values, sign):
    qc0, qd0 = geom.q0
    s_values = np.asarray(s_values, dtype=float)
    s_values[len(s_values) // 2] = 0.0
    pts = []
    for s in s_values:
        try:
            pts.append(leg_forward_kinematics(geom, qc0 + s, qd0 + sign * s))
        except UnreachableError:
            continue
    return np.array(pts).reshape(-1, 2)


def workspace_sample(geom: LegGeometry, grid_n: int) -> WorkspaceSample:
    if grid_n < 2:
        raise DomainError("grid_n must be at least 2")
    qc = np.linspace(*geom.q_C_range, grid_n)
    qd = np.linspace(*geom.q_D_range, grid_n)
    pts, joints = [], []
    for a in qc:
        for b in qd:
            try:
                pts.append(leg_forward_kinematics(geom, a, b))
            except UnreachableError:
                continue
            joints.append((a, b))

    qc0, qd0 = geom.q0
    n_line = 2 * grid_n + 1  # odd so the midpoint is sampled exactly
    s_lo, s_hi = geom.s_range
    half = min(-s_lo, s_hi)
    opposite = _polyline(geom, np.linspace(-half, half, n_line), -1)
    lo = max(geom.q_C_range[0] - qc0, geom.q_D_range[0] - qd0)
    hi = min(geom.q_C_range[1] - qc0, geom.q_D_range[1] - qd0)
    half = min(-lo, hi)
    same = _polyline(geom, np.linspace(-half, half, n_line), +1)
    return WorkspaceSample(points=np.array(pts).reshape(-1, 2), coop_same=same,
                           coop_opposite=opposite, joints=np.array(joints).reshape(-1, 2))
