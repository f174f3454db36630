import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import ellipe, ellipk

from pinto_sim.errors import DomainError
from pinto_sim.jumpdyn import default_springs
from pinto_sim.linkage import SpringLinkGeometry
from pinto_sim.spring import (MAX_STRAIN, SpringAssembly, StripSpec, axial_energy, axial_force,
                              buckling_angle, buckling_shortening, critical_load, elastica_table,
                              pack_energy, spring_torque, stored_energy, torque_curve,
                              torque_variation)

STRIP = StripSpec(5e-3, 0.5e-3, 0.085, 120e9, 1)
SPRINGS = default_springs()
REF = SPRINGS[0]


def _elliptic_oracle(k):
    """(delta/l0, P/P_cr) of the pinned-pinned elastica with modulus k."""
    m = k * k
    K, E = ellipk(m), ellipe(m)
    return 2.0 - 2.0 * E / K, (2.0 * K / math.pi) ** 2


def test_critical_load_examples():
    assert critical_load(STRIP) == pytest.approx(8.54, abs=0.005)
    two = StripSpec(5e-3, 0.5e-3, 0.085, 120e9, 2)
    assert critical_load(two) == pytest.approx(2 * critical_load(STRIP), rel=1e-15)
    long = StripSpec(5e-3, 0.5e-3, 0.170, 120e9, 1)
    assert critical_load(long) == pytest.approx(critical_load(STRIP) / 4, rel=1e-15)


def test_strip_invariants():
    assert STRIP.I == pytest.approx(5e-3 * (0.5e-3) ** 3 / 12, rel=1e-15)
    for kw in (dict(width=0), dict(thickness=6e-3), dict(count=0), dict(youngs_modulus=-1)):
        args = dict(width=5e-3, thickness=0.5e-3, free_length=0.085)
        args.update(kw)
        with pytest.raises(DomainError):
            StripSpec(**args)


def test_axial_force_basics():
    assert axial_force(STRIP, 0.0) == 0.0
    assert axial_force(STRIP, -1e-3) == 0.0
    with pytest.raises(DomainError):
        axial_force(STRIP, 0.41 * STRIP.free_length)
    p = axial_force(STRIP, 0.2 * STRIP.free_length)
    assert p > critical_load(STRIP)


def test_series_expansion_oracle():
    pcr = critical_load(STRIP)
    db = buckling_shortening(STRIP)
    for x in np.linspace(db / STRIP.free_length * 1.01, 0.05, 25):
        ratio = axial_force(STRIP, x * STRIP.free_length) / pcr
        assert ratio == pytest.approx(1 + x / 2, rel=0.02)


def test_table_matches_elliptic_closed_form():
    table = elastica_table()
    for k in np.linspace(0.05, 0.6, 30):
        x, p = _elliptic_oracle(k)
        if x <= MAX_STRAIN:
            assert float(table(x)) == pytest.approx(p, rel=1e-6)


def test_table_shape():
    t = elastica_table()
    assert len(t.strain) == 512
    assert t.strain[0] == 0.0 and t.strain[-1] == pytest.approx(0.4)
    assert np.all(np.diff(t.load_ratio) > 0)


def test_axial_force_monotone_continuous():
    d = np.linspace(0, MAX_STRAIN * STRIP.free_length, 20001)
    p = np.array([axial_force(STRIP, v) for v in d])
    assert np.all(np.diff(p) >= -1e-9)
    # a continuous curve has no jump much larger than its local slope allows
    db = buckling_shortening(STRIP)
    i = np.searchsorted(d, db)
    assert abs(p[i] - p[i - 1]) < STRIP.axial_stiffness * (d[1] - d[0]) * 1.01


def test_torque_zero_at_rest_and_nonnegative():
    g = REF.geometry
    assert spring_torque(REF, g.phi_rest) == 0.0
    for phi in np.linspace(g.phi_min, g.phi_rest, 301):
        assert spring_torque(REF, phi) >= 0.0
    with pytest.raises(DomainError):
        spring_torque(REF, g.phi_min - 0.01)


def test_torque_is_energy_derivative():
    g = REF.geometry
    phi = 0.5 * (g.phi_min + g.phi_rest)
    h = 1e-5
    dU = (stored_energy(REF, g.phi_rest, phi - h) - stored_energy(REF, g.phi_rest, phi + h)) / (2 * h)
    assert spring_torque(REF, phi) == pytest.approx(dU, rel=1e-4)


def test_virtual_work_identity():
    g = REF.geometry
    for a, b in [(g.phi_rest, g.phi_min), (1.5, 1.1), (1.2, 0.96)]:
        e_phi = stored_energy(REF, a, b)
        e_delta = axial_energy(REF.strip, REF.shortening(a), REF.shortening(b))
        assert abs(e_phi - e_delta) / e_delta <= 1e-5


@settings(max_examples=30, deadline=None)
@given(u=st.floats(0, 1), v=st.floats(0, 1), w=st.floats(0, 1))
def test_energy_additive(u, v, w):
    g = REF.geometry
    a, b, c = (g.phi_min + t * (g.phi_rest - g.phi_min) for t in (u, v, w))
    total = stored_energy(REF, a, c)
    parts = stored_energy(REF, a, b) + stored_energy(REF, b, c)
    assert abs(total - parts) <= 1e-9


def test_stored_energy_zero_interval():
    assert stored_energy(REF, 1.2, 1.2) == 0.0


def test_reference_pack_energy():
    assert pack_energy(SPRINGS) == pytest.approx(2.53, rel=0.10)


def test_assembly_never_preloaded():
    g = SpringLinkGeometry(0.07, 0.0427, 1.5, 0.95)
    with pytest.raises(DomainError):
        SpringAssembly(g, StripSpec(5e-3, 0.5e-3, 0.2))


def test_torque_curve_endpoints():
    (c,) = torque_curve(REF, [0.61], 2)
    g = REF.geometry
    assert c.torque[0] == spring_torque(REF, g.phi_rest) == 0.0
    assert c.torque[1] == spring_torque(REF, g.phi_min)
    for curve in torque_curve(REF, [0.61, 0.92, 1.22], 50):
        assert curve.torque[0] == 0.0
    with pytest.raises(DomainError):
        torque_curve(REF, [0.0], 5)
    with pytest.raises(DomainError):
        torque_curve(REF, [0.61], 1)


@pytest.mark.parametrize("ratios", [(0.61, 0.92, 1.22), (0.61, 0.9, 1.2)])
def test_flatness_ordering(ratios):
    curves = torque_curve(REF, ratios, 401)
    start = buckling_angle(REF)
    cov = [torque_variation(c, start) for c in curves]
    assert cov[0] < cov[1] < cov[2]


def test_flatness_max_min_ratio():
    lo, hi = torque_curve(REF, [0.61, 1.2], 401)
    start = buckling_angle(REF)

    def spread(c):
        # same strip on longer output arms engages late, so part of the
        # reference window carries no torque at all (infinite spread)
        t = c.torque[c.phi <= start]
        return t.max() / t.min() if t.min() > 0 else math.inf

    assert spread(lo) < spread(hi)
