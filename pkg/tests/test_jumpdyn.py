import math
from dataclasses import replace

import numpy as np
import pytest

from pinto_sim.errors import DomainError, NumericalInstabilityError
from pinto_sim.jumpdyn import (LIFTOFF, NO_LIFTOFF, RobotConfig, compare_modes, initial_state,
                               simulate_jump, step)
from pinto_sim.lamsa import ActuationMode

BASE = RobotConfig()


@pytest.fixture(scope="module")
def runs():
    return {m: simulate_jump(BASE.with_mode(m)) for m in ("rigid", "sea", "pea")}


def test_config_validation():
    with pytest.raises(DomainError):
        RobotConfig(mass=-1)
    with pytest.raises(DomainError):
        RobotConfig(duty_times=(0.0, 0.1), duty_values=(1.0,))
    with pytest.raises(DomainError):
        RobotConfig(duty_values=(1.5,))
    with pytest.raises(DomainError):
        RobotConfig(string_efficiency=0.0)
    assert RobotConfig().mass == 0.450


def test_static_rest_with_zero_duty():
    cfg = replace(BASE, duty_values=(0.0,), mode=ActuationMode.RIGID)
    s0 = initial_state(cfg)
    s1 = step(cfg, s0, 1e-4)
    assert s1.t == pytest.approx(1e-4)
    for name in ("y", "v", "theta_m", "omega_m", "phi_in", "phi_out"):
        assert getattr(s1, name) == getattr(s0, name)


def test_zero_duty_no_liftoff():
    res = simulate_jump(replace(BASE, duty_values=(0.0,), t_max=0.05))
    assert res.outcome == NO_LIFTOFF and res.takeoff_energy == 0.0
    grf = res.traces["grf_N"]
    assert grf[0] == pytest.approx(BASE.mass * BASE.gravity, rel=1e-9)


def test_step_rejects_bad_dt():
    with pytest.raises(DomainError):
        step(BASE, initial_state(BASE), 0.0)


def test_latched_output_does_not_drift():
    cfg = BASE.with_mode("pea")
    s = initial_state(cfg)
    phi0 = s.phi_out
    for _ in range(400):
        s = step(cfg, s, 5e-6)
        assert abs(s.phi_out - phi0) < 1e-12
    assert s.latch.latched and s.phi_in > phi0


def test_lossless_step_guard():
    cfg = BASE.make_lossless().with_mode("sea")
    s = initial_state(cfg)
    for _ in range(400):
        s = step(cfg, s, 5e-6)
    with pytest.raises(NumericalInstabilityError):
        for _ in range(50):
            s = step(cfg, s, 2e-3)


@pytest.mark.parametrize("mode", ["rigid", "sea", "pea"])
def test_lossless_energy_audit(mode):
    res = simulate_jump(BASE.make_lossless().with_mode(mode))
    assert res.outcome == LIFTOFF
    assert abs(res.energy_residual) <= 1e-3


def test_takeoff_energy_from_traces(runs):
    for res in runs.values():
        assert res.outcome == LIFTOFF
        tr = res.traces
        e = 0.5 * BASE.mass * tr["v_mps"][-1] ** 2 + BASE.mass * BASE.gravity * (tr["y_m"][-1] - tr["y_m"][0])
        assert res.takeoff_energy == pytest.approx(e, rel=1e-9)
        assert res.apex_height == pytest.approx(res.takeoff_energy / (BASE.mass * BASE.gravity))


def test_grf_unilateral(runs):
    for res in runs.values():
        assert np.all(res.traces["grf_N"] >= -1e-9)


def test_liftoff_is_first_zero_with_upward_speed(runs):
    for res in runs.values():
        tr = res.traces
        assert tr["v_mps"][-1] > 0
        assert res.events[-1][1] == "liftoff"


def test_one_release_before_liftoff(runs):
    names = [n for _, n in runs["pea"].events]
    assert names.count("release") == 1
    assert names.index("release") < names.index("liftoff")
    for m in ("rigid", "sea"):
        assert "release" not in [n for _, n in runs[m].events]


def _compression(res):
    tr = res.traces
    before = tr["t_s"] < res.release_time
    return tr["phi_in_rad"] - tr["phi_out_rad"], before


def test_pea_compresses_while_latched(runs):
    psi, before = _compression(runs["pea"])
    assert psi[before].max() > 0.02
    assert np.all(np.diff(runs["pea"].traces["phi_out_rad"][before]) == 0)


@pytest.mark.xfail(strict=True, reason=(
    "reference calibration: the current-limited motor keeps the input link ahead of the "
    "output after release; only a much higher winding resistance gives convergence, and "
    "that misses the rigid energy and time bands"))
def test_pea_converges_after_release(runs):
    psi, before = _compression(runs["pea"])
    assert psi[-1] < psi[before][-1]


def test_rigid_links_move_together(runs):
    tr = runs["rigid"].traces
    assert np.array_equal(tr["phi_in_rad"], tr["phi_out_rad"])


@pytest.mark.xfail(strict=True, reason=(
    "stance model cannot produce it: the spring pushes the input link back while "
    "compressed, the reflected rotor inertia keeps the string taut, and liftoff "
    "occurs exactly when the compression reaches zero"))
def test_string_goes_slack_after_release(runs):
    res = runs["pea"]
    slack = [t for t, n in res.events if n == "slack"]
    assert any(t > res.release_time for t in slack)
    tr = res.traces
    after = tr["t_s"] > res.release_time
    assert np.any(tr["tension_N"][after] == 0.0)


def test_pea_never_latched_equals_sea():
    s_lo = BASE.leg.s_range[0]
    latch = replace(BASE.latch, release_angle=s_lo)
    pea = simulate_jump(replace(BASE, latch=latch, mode=ActuationMode.PEA))
    sea = simulate_jump(replace(BASE, latch=latch, mode=ActuationMode.SEA))
    for k in ("y_m", "v_mps", "phi_in_rad", "phi_out_rad", "theta_m_rad"):
        np.testing.assert_allclose(pea.traces[k], sea.traces[k], rtol=0, atol=1e-9)


def test_event_timing_converges():
    a = simulate_jump(replace(BASE, dt=4e-6))
    b = simulate_jump(replace(BASE, dt=2e-6))
    assert abs(a.release_time - b.release_time) < 1e-5
    assert abs(a.liftoff_time - b.liftoff_time) < 1e-5


def test_deterministic():
    a = simulate_jump(BASE)
    b = simulate_jump(BASE)
    for k, v in a.traces.items():
        assert np.array_equal(v, b.traces[k])
    assert a.events == b.events


def test_compare_modes_rows(runs):
    rows = compare_modes(BASE)
    assert [r["mode"] for r in rows] == ["rigid", "sea", "pea"]
    for r in rows:
        res = runs[r["mode"]]
        assert r["energy_J"] == res.takeoff_energy
        assert r["time_ms"] == pytest.approx(res.propulsion_time * 1e3)
