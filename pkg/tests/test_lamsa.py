import pytest
from hypothesis import given, settings, strategies as st

from pinto_sim.errors import DomainError
from pinto_sim.jumpdyn import default_springs
from pinto_sim.lamsa import (ActuationMode, LatchEvent, LatchPhase, LatchState, coupling_torque,
                             latch_step)
from pinto_sim.spring import buckling_angle, spring_torque, stored_energy

SPRINGS = default_springs()
ASSY = SPRINGS[0]
STATE = LatchState(release_angle=0.5, reset_angle=0.1, latch_angle=0.0)


def test_mode_parse():
    assert ActuationMode.parse("PEA") is ActuationMode.PEA
    assert ActuationMode.parse(ActuationMode.SEA) is ActuationMode.SEA
    assert {m.value for m in ActuationMode} == {"rigid", "sea", "pea"}
    with pytest.raises(DomainError):
        ActuationMode.parse("springy")


def test_latch_examples():
    s, ev = latch_step(STATE, 0.3, 0.0)
    assert s == STATE and ev is LatchEvent.NONE
    s, ev = latch_step(STATE, 0.5, 0.0)
    assert s.phase is LatchPhase.RELEASED and not s.armed and ev is LatchEvent.RELEASE
    s2, ev = latch_step(s, 0.6, 0.3)
    assert s2 == s and ev is LatchEvent.NONE
    s3, ev = latch_step(s2, 0.6, 0.05)
    assert s3.armed and s3.phase is LatchPhase.RELEASED and ev is LatchEvent.RESET
    s4, ev = latch_step(s3, 0.2, 0.0)
    assert s4.latched and ev is LatchEvent.NONE


def test_latch_invariants():
    with pytest.raises(DomainError):
        LatchState(reset_angle=0.0, latch_angle=0.2)
    with pytest.raises(DomainError):
        STATE.within(0.0, 0.4)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(-0.2, 1.0), st.floats(-0.2, 1.0)), max_size=60))
def test_release_reset_alternate(path):
    s = STATE
    events = []
    for phi_in, phi_out in path:
        s, ev = latch_step(s, phi_in, phi_out)
        if ev is not LatchEvent.NONE:
            events.append(ev)
        if s.phase is LatchPhase.RELEASED and phi_out > s.reset_angle and ev is LatchEvent.RELEASE:
            assert not s.armed
    for a, b in zip(events, events[1:]):
        assert a is not b


def test_coupling_modes():
    g = ASSY.geometry
    rigid = coupling_torque("rigid", STATE, ASSY, 0.3, 0.1)
    assert rigid.locked and rigid.locked_to == "input" and rigid.output == 0.0
    psi = 0.3
    sea = coupling_torque("sea", STATE, ASSY, psi, 0.0)
    tau = spring_torque(ASSY, g.phi_rest - psi)
    assert sea.output == tau and sea.input == -tau and not sea.locked
    pea = coupling_torque("pea", STATE, ASSY, psi, 0.0)
    assert pea.locked and pea.locked_to == "ground" and pea.output == tau
    released, _ = latch_step(STATE, 1.0, 0.0)
    assert coupling_torque("pea", released, ASSY, psi, 0.0) == sea
    with pytest.raises(DomainError):
        coupling_torque("sea", STATE, ASSY, -0.1, 0.0)
    total = coupling_torque("sea", STATE, SPRINGS, psi, 0.0)
    assert total.output == pytest.approx(sum(spring_torque(a, g.phi_rest - psi) for a in SPRINGS))


def test_latched_loading_bookkeeping():
    # with the output grounded, the work done on the input is stored in the spring
    import numpy as np
    from scipy.integrate import quad
    g = ASSY.geometry
    top = g.phi_rest - g.phi_min
    work, _ = quad(lambda p: -coupling_torque("pea", STATE, ASSY, p, 0.0).input, 0.0, top,
                   points=[g.phi_rest - buckling_angle(ASSY)], limit=200, epsrel=1e-10)
    assert work == pytest.approx(stored_energy(ASSY, g.phi_rest, g.phi_min), rel=1e-6)
