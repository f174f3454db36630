import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pinto_sim.errors import DomainError, SingularityError, UnreachableError
from pinto_sim.linkage import (LegGeometry, SpringLinkGeometry, chord_length, chord_moment_arm,
                               cooperative_joints, leg_extension, leg_forward_kinematics,
                               leg_jacobian, leg_junction, transmission_ratio, workspace_sample)

G = SpringLinkGeometry(0.030, 0.0183, 2.0, 0.5)
LEG = LegGeometry()


def _points(geom, phi):
    # arm tips from explicit coordinates
    a = np.array([geom.L1, 0.0])
    b = geom.L2 * np.array([math.cos(phi), math.sin(phi)])
    return a, b


def test_chord_examples():
    assert chord_length(G, 0.0) == pytest.approx(0.0117, abs=1e-12)
    a, b = _points(G, math.pi / 2)
    assert chord_length(G, math.pi / 2) == pytest.approx(np.linalg.norm(a - b), rel=1e-12)
    # listed reference 0.035137; the closed form gives 0.0351410 (1.2e-4 apart)
    assert chord_length(G, math.pi / 2) == pytest.approx(0.035137, rel=2e-4)
    eq = SpringLinkGeometry(0.025, 0.025, 3.0, 1.0)
    assert chord_length(eq, math.pi) == pytest.approx(0.050, abs=1e-15)


def test_chord_domain():
    with pytest.raises(DomainError):
        chord_length(G, -0.1)
    with pytest.raises(DomainError):
        chord_length(G, math.pi + 1e-9)


def test_moment_arm_examples():
    a, b = _points(G, math.pi / 2)
    # point-to-line distance from the pivot (origin)
    d_line = abs(a[0] * b[1] - a[1] * b[0]) / np.linalg.norm(b - a)
    assert chord_moment_arm(G, math.pi / 2) == pytest.approx(d_line, rel=1e-12)
    assert chord_moment_arm(G, math.pi / 2) == pytest.approx(0.015624, rel=2e-4)
    eq = SpringLinkGeometry(0.02, 0.02, 3.0, 1.0)
    assert chord_moment_arm(eq, math.pi / 2) == pytest.approx(0.02 / math.sqrt(2), rel=1e-12)
    assert chord_moment_arm(G, 1e-9) == pytest.approx(0.0, abs=1e-9)
    for phi in (0.0, math.pi):
        with pytest.raises(DomainError):
            chord_moment_arm(G, phi)


def test_ratio_accessor():
    g = SpringLinkGeometry(0.07, 0.0427, 1.6, 0.9)
    assert g.R == 0.0427 / 0.07


@pytest.mark.parametrize("bad", [dict(L1=0), dict(L2=-1), dict(phi_min=2.0), dict(phi_rest=4.0)])
def test_spring_geometry_invariants(bad):
    kw = dict(L1=0.07, L2=0.04, phi_rest=1.6, phi_min=0.9)
    kw.update(bad)
    with pytest.raises(DomainError):
        SpringLinkGeometry(**kw)


@settings(max_examples=200, deadline=None)
@given(L1=st.floats(1e-3, 1.0), L2=st.floats(1e-3, 1.0), phi=st.floats(0.0, math.pi))
def test_chord_bounds(L1, L2, phi):
    g = SpringLinkGeometry(L1, L2, math.pi, 1e-3)
    c = chord_length(g, phi)
    assert abs(L1 - L2) * (1 - 1e-12) - 1e-15 <= c <= (L1 + L2) * (1 + 1e-12)
    if 0 < phi < math.pi and c > 0:
        assert chord_moment_arm(g, phi) <= min(L1, L2) * (1 + 1e-12)


def test_chord_monotone():
    phis = np.linspace(0, math.pi, 2001)
    c = [chord_length(G, p) for p in phis]
    assert np.all(np.diff(c) > 0)


def test_moment_arm_is_chord_derivative():
    for phi in np.linspace(0.3, 2.8, 11):
        h = 1e-6
        fd = (chord_length(G, phi + h) - chord_length(G, phi - h)) / (2 * h)
        assert chord_moment_arm(G, phi) == pytest.approx(fd, rel=1e-7)


def test_mirror_symmetry_on_axis():
    sym = LegGeometry(l_G=0.0)
    for q_D in np.linspace(*sym.q_D_range, 7):
        foot = leg_forward_kinematics(sym, math.pi - q_D, q_D)
        assert abs(foot[0]) < 1e-12


@settings(max_examples=100, deadline=None)
@given(a=st.floats(0, 1), b=st.floats(0, 1))
def test_mirror_reflection(a, b):
    sym = LegGeometry(l_G=0.0)
    q_C = sym.q_C_range[0] + a * (sym.q_C_range[1] - sym.q_C_range[0])
    q_D = sym.q_D_range[0] + b * (sym.q_D_range[1] - sym.q_D_range[0])
    f = leg_forward_kinematics(sym, q_C, q_D)
    # reflecting x -> -x swaps the roles of C and D and flips the elbow side
    g = leg_forward_kinematics(sym, math.pi - q_D, math.pi - q_C)
    assert g[0] == pytest.approx(-f[0], abs=1e-12)
    assert g[1] == pytest.approx(f[1], abs=1e-12)


def test_unreachable():
    g = LegGeometry(l_E=0.01, l_F=0.01, q_C_range=(math.pi - 0.1, math.pi + 0.1),
                    q_D_range=(-0.1, 0.1))
    with pytest.raises(UnreachableError):
        leg_forward_kinematics(g, math.pi, 0.0)  # knees 0.2 apart


@settings(max_examples=200, deadline=None)
@given(a=st.floats(0, 1), b=st.floats(0, 1))
def test_fk_closure(a, b):
    q_C = LEG.q_C_range[0] + a * (LEG.q_C_range[1] - LEG.q_C_range[0])
    q_D = LEG.q_D_range[0] + b * (LEG.q_D_range[1] - LEG.q_D_range[0])
    try:
        pc, pd, j = leg_junction(LEG, q_C, q_D)
    except UnreachableError:
        return
    assert np.linalg.norm(j - pc) == pytest.approx(LEG.l_E, rel=1e-9)
    assert np.linalg.norm(j - pd) == pytest.approx(LEG.l_F, rel=1e-9)


def test_jacobian_matches_finite_difference():
    rng = np.random.default_rng(3)
    for _ in range(20):
        q_C = rng.uniform(*LEG.q_C_range)
        q_D = rng.uniform(*LEG.q_D_range)
        J = leg_jacobian(LEG, q_C, q_D)
        h = 1e-6
        fd = np.column_stack([
            (leg_forward_kinematics(LEG, q_C + h, q_D) - leg_forward_kinematics(LEG, q_C - h, q_D)) / (2 * h),
            (leg_forward_kinematics(LEG, q_C, q_D + h) - leg_forward_kinematics(LEG, q_C, q_D - h)) / (2 * h),
        ])
        np.testing.assert_allclose(J, fd, rtol=1e-6, atol=1e-9)


def test_stroke_and_monotone_extension():
    lo, hi = LEG.s_range
    s = np.linspace(lo, hi, 401)
    xi = np.array([leg_extension(LEG, v) for v in s])
    assert xi[-1] - xi[0] == pytest.approx(0.118, rel=0.05)
    assert xi.argmin() == 0
    assert np.all(np.diff(xi) > 0)


def test_extension_matches_fk():
    s = 0.5 * sum(LEG.s_range) + 0.05
    foot = leg_forward_kinematics(LEG, *cooperative_joints(LEG, s))
    assert leg_extension(LEG, s) == math.hypot(*foot)


def test_transmission_ratio_finite_difference():
    lo, hi = LEG.s_range
    rng = np.random.default_rng(7)
    worst = 0.0
    for s in rng.uniform(lo + 0.01, hi - 0.01, 20):
        h = 1e-6
        fd = (leg_extension(LEG, s + h) - leg_extension(LEG, s - h)) / (2 * h)
        T = transmission_ratio(LEG, s)
        assert T > 0
        worst = max(worst, abs(T - fd) / abs(fd))
    assert worst <= 1e-4


def test_transmission_ratio_scales():
    s = 0.1
    assert transmission_ratio(LEG.scaled(2.0), s) == pytest.approx(2 * transmission_ratio(LEG, s),
                                                                   rel=1e-12)


def test_transmission_singularity_near_boundary():
    # short distal links: the knees drift too far apart near full extension
    g = LegGeometry(l_C=0.10, l_D=0.10, l_E=0.06, l_F=0.06, l_G=0.0,
                    q_C_range=(-math.pi / 2 - 1.0, -math.pi / 2 - 0.3),
                    q_D_range=(-math.pi / 2 + 0.3, -math.pi / 2 + 1.0))
    # knee spacing 2 l_C sin(beta) reaches l_E + l_F at beta = asin(0.6)
    beta = math.asin(0.6)
    s_edge = 0.65 - beta  # beta = 0.65 - s along the cooperative path
    assert transmission_ratio(g, s_edge + 0.01) != 0
    with pytest.raises(SingularityError):
        transmission_ratio(g, s_edge + 5e-4)


def test_workspace_small_grid():
    ws = workspace_sample(LEG, 2)
    assert len(ws.points) <= 4
    for (a, b), p in zip(ws.joints, ws.points):
        assert a in LEG.q_C_range and b in LEG.q_D_range
        np.testing.assert_array_equal(p, leg_forward_kinematics(LEG, a, b))
    with pytest.raises(DomainError):
        workspace_sample(LEG, 1)


def test_polylines_through_midpoint():
    ws = workspace_sample(LEG, 9)
    mid = leg_forward_kinematics(LEG, *LEG.q0)
    for line in (ws.coop_same, ws.coop_opposite):
        assert np.min(np.linalg.norm(line - mid, axis=1)) == 0.0


def test_polylines_inside_dense_hull():
    from scipy.spatial import Delaunay
    ws = workspace_sample(LEG, 200)
    hull = Delaunay(ws.points)
    small = workspace_sample(LEG, 25)
    for line in (small.coop_same, small.coop_opposite):
        # pad by a hair for points lying on the hull boundary
        centre = ws.points.mean(axis=0)
        shrunk = centre + (line - centre) * (1 - 1e-9)
        assert np.all(hull.find_simplex(shrunk) >= 0)
