"""Post-buckling carbon strip springs compressed by a two-link mechanism.

A pinned-pinned strip buckles at the Euler load and then follows the elastica,
whose force rises only slowly with end shortening. The two-link geometry
converts that force into a torque about the shared pivot.

The elastica is solved by shooting on the pendulum form of the beam equation::

    theta'' = -sin(theta),  theta(0) = alpha,  theta'(0) = 0

The first zero of ``theta`` is a quarter wavelength. Rescaling that solution to
the strip length gives ``P/P_cr`` and ``delta/l0`` as functions of ``alpha``.
Both ratios are independent of the strip's dimensions, so one table serves
every strip.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import DomainError
from .linkage import SpringLinkGeometry, chord_length, chord_moment_arm

__all__ = [
    "StripSpec",
    "SpringAssembly",
    "TorqueCurve",
    "ElasticaTable",
    "elastica_table",
    "critical_load",
    "axial_force",
    "axial_energy",
    "buckling_shortening",
    "spring_torque",
    "torque_curve",
    "stored_energy",
    "pack_energy",
    "torque_variation",
    "buckling_angle",
    "rest_angle_for",
]

MAX_STRAIN = 0.4  # delta/l0 limit of the model
TABLE_SIZE = 512
_SHOOT_NODES = 200


@dataclass(frozen=True)
class StripSpec:
    """One pack of identical strips loaded in parallel."""

    width: float
    thickness: float
    free_length: float
    youngs_modulus: float = 120e9
    count: int = 1

    def __post_init__(self):
        for name in ("width", "thickness", "free_length", "youngs_modulus"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if not self.thickness < self.width:
            raise DomainError("thickness must be smaller than width")
        if int(self.count) != self.count or self.count < 1:
            raise DomainError("count must be an integer >= 1")

    @property
    def I(self) -> float:
        return self.width * self.thickness ** 3 / 12.0

    @property
    def area(self) -> float:
        return self.width * self.thickness

    @property
    def axial_stiffness(self) -> float:
        """Pre-buckling stiffness of the whole pack, N/m."""
        return self.count * self.youngs_modulus * self.area / self.free_length


def critical_load(strip: StripSpec) -> float:
    """Euler load of the pack, pinned at both ends."""
    return strip.count * math.pi ** 2 * strip.youngs_modulus * strip.I / strip.free_length ** 2


# -- elastica table ---------------------------------------------------------

def _shoot(alpha: float) -> tuple[float, float]:
    """Return ``(delta/l0, P/P_cr)`` for end slope ``alpha``."""

    def rhs(_, y):
        return (y[1], -math.sin(y[0]), math.cos(y[0]))

    def crossing(_, y):
        return y[0]

    crossing.terminal = True
    crossing.direction = -1
    sol = solve_ivp(rhs, (0.0, 20.0), (alpha, 0.0, 0.0), method="DOP853",
                    rtol=1e-12, atol=1e-14, events=crossing)
    quarter = sol.t_events[0][0]
    chord = sol.y_events[0][0][2]
    # half the strip spans 2*quarter in scaled arc length
    return 1.0 - chord / quarter, (2.0 * quarter / math.pi) ** 2


@dataclass(frozen=True)
class ElasticaTable:
    """``P/P_cr`` sampled on a uniform ``delta/l0`` grid, with PCHIP slopes."""

    strain: np.ndarray
    load_ratio: np.ndarray
    coeffs: np.ndarray  # PPoly coefficients, shape (4, n-1)
    poly: PchipInterpolator = field(repr=False, compare=False)

    def __call__(self, strain):
        return self.poly(strain)


_table = None
_table_lock = threading.Lock()


def elastica_table() -> ElasticaTable:
    """Build (once per process) the normalized post-buckling force table."""
    global _table
    if _table is None:
        with _table_lock:
            if _table is None:
                _table = _build_table()
    return _table


def _build_table() -> ElasticaTable:
    # small-amplitude theory gives delta/l0 ~ sin^2(alpha/2); spacing nodes
    # that way keeps them roughly uniform in strain
    target = np.linspace(0.0, 0.42, _SHOOT_NODES)[1:]
    nodes = [(0.0, 1.0)] + [_shoot(2.0 * math.asin(math.sqrt(x))) for x in target]
    x, p = np.array(nodes).T
    fine = PchipInterpolator(x, p)
    strain = np.linspace(0.0, MAX_STRAIN, TABLE_SIZE)
    load = fine(strain)
    load[0] = 1.0
    pp = PchipInterpolator(strain, load)
    strain.setflags(write=False)
    load.setflags(write=False)
    coeffs = np.ascontiguousarray(pp.c)
    coeffs.setflags(write=False)
    return ElasticaTable(strain, load, coeffs, pp)


# -- force law --------------------------------------------------------------

def _check_delta(strip, delta):
    if delta > MAX_STRAIN * strip.free_length * (1 + 1e-12):
        raise DomainError(
            f"end shortening {delta:.6g} m exceeds {MAX_STRAIN} of the free length")


def axial_force(strip: StripSpec, delta: float) -> float:
    """Compressive force in the pack at end shortening ``delta``.

    Negative ``delta`` means the strip is not in contact and carries nothing.
    """
    if delta <= 0.0:
        return 0.0
    _check_delta(strip, delta)
    linear = strip.axial_stiffness * delta
    pcr = critical_load(strip)
    if linear <= pcr:
        return linear
    x = min(delta / strip.free_length, MAX_STRAIN)
    return min(linear, pcr * float(elastica_table()(x)))


def buckling_shortening(strip: StripSpec) -> float:
    """Shortening at which the linear branch meets the elastica."""
    pcr = critical_load(strip)
    k = strip.axial_stiffness
    table = elastica_table()
    f = lambda d: k * d - pcr * float(table(d / strip.free_length))
    return brentq(f, 0.0, MAX_STRAIN * strip.free_length, xtol=1e-16, rtol=1e-15)


def axial_energy(strip: StripSpec, delta_from: float, delta_to: float) -> float:
    """Work done on the pack shortening it from ``delta_from`` to ``delta_to``."""
    lo, hi = sorted((delta_from, delta_to))
    if hi <= 0.0:
        return 0.0
    lo = max(lo, 0.0)
    db = buckling_shortening(strip)
    total = 0.0
    if lo < db:
        top = min(hi, db)
        total += 0.5 * strip.axial_stiffness * (top * top - lo * lo)
    if hi > db:
        val, _ = quad(lambda d: axial_force(strip, d), max(lo, db), hi,
                      epsabs=0.0, epsrel=1e-12, limit=200)
        total += val
    return total if delta_to >= delta_from else -total


# -- assemblies -------------------------------------------------------------

def rest_angle_for(L1: float, L2: float, length: float) -> float:
    """Included angle at which the chord equals ``length``."""
    cos_phi = (L1 * L1 + L2 * L2 - length * length) / (2.0 * L1 * L2)
    if abs(cos_phi) > 1.0:
        raise DomainError(f"arms {L1}, {L2} cannot span a chord of {length}")
    return math.acos(cos_phi)


@dataclass(frozen=True)
class SpringAssembly:
    """A strip pack seated between the tips of the two spring arms.

    The strip is never preloaded: its free length is at most the chord at
    the rest angle. When it is shorter the strip sits loose until the links
    close far enough to touch it.
    """

    geometry: SpringLinkGeometry
    strip: StripSpec

    def __post_init__(self):
        c_rest = chord_length(self.geometry, self.geometry.phi_rest)
        if self.strip.free_length > c_rest + 1e-9:
            raise DomainError(
                f"strip free length {self.strip.free_length:.9g} m exceeds the rest chord "
                f"{c_rest:.9g} m (the strip would be preloaded)")
        if self.shortening(self.geometry.phi_min) > MAX_STRAIN * self.strip.free_length:
            raise DomainError("phi_min compresses the strip beyond the model limit")

    def shortening(self, phi: float) -> float:
        return self.strip.free_length - chord_length(self.geometry, phi)

    @property
    def contact_angle(self) -> float:
        """Largest angle at which the strip is loaded."""
        g = self.geometry
        if self.shortening(g.phi_rest) >= 0.0:
            return g.phi_rest
        return rest_angle_for(g.L1, g.L2, self.strip.free_length)


def _check_phi(assy, phi):
    g = assy.geometry
    if not g.phi_min - 1e-12 <= phi <= g.phi_rest + 1e-12:
        raise DomainError(f"phi={phi!r} outside [{g.phi_min}, {g.phi_rest}]")


def spring_torque(assy: SpringAssembly, phi: float) -> float:
    """Torque resisting further closing of the links at angle ``phi``."""
    _check_phi(assy, phi)
    delta = assy.shortening(phi)
    if delta <= 0.0:
        return 0.0
    return axial_force(assy.strip, delta) * chord_moment_arm(assy.geometry, phi)


def _potential(assy, phi):
    """Energy stored compressing from rest down to ``phi``."""
    _check_phi(assy, phi)
    top = assy.contact_angle
    if phi >= top:
        return 0.0
    breaks = [b for b in (buckling_angle(assy),) if phi < b < top]
    val, _ = quad(lambda p: spring_torque(assy, p), phi, top, points=breaks or None,
                  epsabs=0.0, epsrel=1e-12, limit=200)
    return val


def stored_energy(assy: SpringAssembly, phi_from: float, phi_to: float) -> float:
    """Energy put into the spring by moving from ``phi_from`` to ``phi_to``.

    Closing the links (``phi_to < phi_from``) stores a positive amount.
    """
    _check_phi(assy, phi_from)
    _check_phi(assy, phi_to)
    if phi_from == phi_to:
        return 0.0
    return _potential(assy, phi_to) - _potential(assy, phi_from)


def pack_energy(assemblies) -> float:
    """Total energy of several assemblies compressed from rest to ``phi_min``."""
    return sum(stored_energy(a, a.geometry.phi_rest, a.geometry.phi_min) for a in assemblies)


def buckling_angle(assy: SpringAssembly) -> float:
    """Angle at which the strip in ``assy`` buckles (chord = l0 - delta_b)."""
    g = assy.geometry
    chord = assy.strip.free_length - buckling_shortening(assy.strip)
    return rest_angle_for(g.L1, g.L2, chord)


# -- design curves ----------------------------------------------------------

@dataclass
class TorqueCurve:
    ratio: float
    assembly: SpringAssembly
    phi: np.ndarray
    torque: np.ndarray


def torque_curve(assy_template: SpringAssembly, ratios, n_points: int) -> list[TorqueCurve]:
    """Torque-angle family obtained by changing ``L2`` only.

    ``L1``, the strip, and the rest and end angles are kept from the template.
    Longer output arms open the chord at rest, so the same strip sits loose
    there and engages later in the stroke.
    """
    if n_points < 2:
        raise DomainError("n_points must be at least 2")
    g = assy_template.geometry
    curves = []
    for R in ratios:
        if not R > 0:
            raise DomainError(f"ratio must be positive, got {R!r}")
        geom = replace(g, L2=R * g.L1)
        assy = SpringAssembly(geom, assy_template.strip)
        phi = np.linspace(g.phi_rest, g.phi_min, n_points)
        tau = np.array([spring_torque(assy, p) for p in phi])
        curves.append(TorqueCurve(float(R), assy, phi, tau))
    return curves


def torque_variation(curve: TorqueCurve, phi_start: float) -> float:
    """Coefficient of variation of torque for samples at or below ``phi_start``.

    Used as the flatness score of a curve: lower is flatter.
    """
    mask = curve.phi <= phi_start
    tau = curve.torque[mask]
    if tau.size < 2 or tau.mean() <= 0.0:
        raise DomainError("window holds too few loaded samples")
    return float(tau.std() / tau.mean())
