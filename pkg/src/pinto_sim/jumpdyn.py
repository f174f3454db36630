"""Stance dynamics of the jump: motor, string, spring, latch, leg and body.

The robot is reduced to one vertical degree of freedom for the body plus the
rotating parts of the drive. Both leg joints move mirror-symmetrically, so a
single cooperative coordinate ``s`` describes the output links, and both
motors act as one aggregate motor.

The integrator is fixed-step RK4 with event location by bisection. Events are
the latch release, the output leaving its crouch stop, string slack, and
liftoff. The loop is compiled with numba; this module packs the configuration
into arrays and unpacks the results.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import _kernel as K
from .actuation import AntagonistBand, MotorSpec, TwistedStringActuator
from .errors import DomainError, NumericalInstabilityError, OverTwistError
from .lamsa import ActuationMode, LatchPhase, LatchState
from .linkage import LegGeometry, SpringLinkGeometry, leg_extension, transmission_ratio
from .spring import (SpringAssembly, StripSpec, buckling_shortening, critical_load,
                     elastica_table, rest_angle_for)

__all__ = [
    "RobotConfig",
    "SimState",
    "JumpResult",
    "default_springs",
    "initial_state",
    "step",
    "simulate_jump",
    "compare_modes",
    "ballistic_apex",
    "NO_LIFTOFF",
    "LIFTOFF",
]

LIFTOFF = "liftoff"
NO_LIFTOFF = "no_liftoff"

EVENT_NAMES = {
    K.EV_RELEASE: "release",
    K.EV_UNLOCK: "unlock",
    K.EV_LIFTOFF: "liftoff",
    K.EV_RELOCK: "relock",
    K.EV_SLACK: "slack",
    K.EV_TAUT: "taut",
}

_LEG_NODES = 1201

# reference spring arms and strip length
SPRING_L1 = 0.070
SPRING_RATIO = 0.61
STRIP_LENGTH = 0.085
SPRING_PHI_MIN = 0.95


def default_springs(modulus: float = 120e9, count: int = 3,
                    ratio: float = SPRING_RATIO) -> tuple:
    """Two centre (5 mm) and two side (3 mm) packs sharing one geometry."""
    L2 = ratio * SPRING_L1
    phi_rest = rest_angle_for(SPRING_L1, L2, STRIP_LENGTH)
    geom = SpringLinkGeometry(SPRING_L1, L2, phi_rest, SPRING_PHI_MIN)
    packs = []
    for width in (5e-3, 5e-3, 3e-3, 3e-3):
        strip = StripSpec(width, 0.5e-3, STRIP_LENGTH, modulus, count)
        packs.append(SpringAssembly(geom, strip))
    return tuple(packs)


# calibrated drive train of the reference robot; the class defaults of
# MotorSpec and TwistedStringActuator stay generic
REFERENCE_MOTOR = MotorSpec(winding_resistance=0.182, i_max=10.66, rotor_inertia=4.22e-6)
REFERENCE_TSA = TwistedStringActuator(string_length=0.206, pulley_radius=0.0386, theta_0=19.6)
RELEASE_OFFSET = 0.0652


def _default_latch():
    s_min = LegGeometry().s_range[0]
    return LatchState(LatchPhase.LATCHED, True, release_angle=s_min + RELEASE_OFFSET,
                      reset_angle=s_min + 0.1, latch_angle=s_min)


def _default_band():
    return AntagonistBand(stiffness=0.05, rest_angle=LegGeometry().s_range[0])


@dataclass(frozen=True)
class RobotConfig:
    """Every physical and numerical parameter of one jump.

    ``motor`` describes a single motor; ``n_motors`` identical motors are
    lumped into one. Angles of the latch and band are in the leg's
    cooperative coordinate. ``duty_times``/``duty_values`` form a
    piecewise-constant duty profile.
    """

    mass: float = 0.450
    gravity: float = 9.81
    mode: ActuationMode = ActuationMode.PEA
    motor: MotorSpec = REFERENCE_MOTOR
    n_motors: int = 2
    tsa: TwistedStringActuator = REFERENCE_TSA
    springs: tuple = field(default_factory=default_springs)
    leg: LegGeometry = field(default_factory=LegGeometry)
    latch: LatchState = field(default_factory=_default_latch)
    band: AntagonistBand = field(default_factory=_default_band)
    bushing_mu: float = 0.25
    bushing_radius: float = 0.008
    viscous_damping: float = 0.0133
    string_efficiency: float = 0.85
    string_stiffness: float = 1e6
    input_inertia: float = 2e-5
    stop_stiffness: float = 500.0
    duty_times: tuple = (0.0,)
    duty_values: tuple = (1.0,)
    kp: float = 0.0
    kp_target: float = 0.0
    dt: float = 5e-6
    t_max: float = 1.0
    event_tol: float = 1e-7
    record_dt: float = 1e-4
    energy_check: bool = False
    energy_check_tol: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "mode", ActuationMode.parse(self.mode))
        object.__setattr__(self, "springs", tuple(self.springs))
        object.__setattr__(self, "duty_times", tuple(float(v) for v in self.duty_times))
        object.__setattr__(self, "duty_values", tuple(float(v) for v in self.duty_values))
        if not self.mass > 0:
            raise DomainError("mass must be positive")
        if not self.gravity > 0:
            raise DomainError("gravity must be positive")
        if int(self.n_motors) != self.n_motors or self.n_motors < 1:
            raise DomainError("n_motors must be a positive integer")
        for name in ("bushing_mu", "bushing_radius", "viscous_damping"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")
        if not 0 < self.string_efficiency <= 1:
            raise DomainError("string_efficiency must lie in (0, 1]")
        for name in ("string_stiffness", "input_inertia", "stop_stiffness", "dt", "t_max",
                     "event_tol", "record_dt"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if len(self.duty_times) != len(self.duty_values) or not self.duty_times:
            raise DomainError("duty_times and duty_values must be non-empty and equally long")
        if self.duty_times[0] != 0.0 or any(b <= a for a, b in zip(self.duty_times, self.duty_times[1:])):
            raise DomainError("duty_times must start at 0 and increase")
        if any(not 0.0 <= d <= 1.0 for d in self.duty_values):
            raise DomainError("duty values must lie in [0, 1]")
        if self.kp < 0:
            raise DomainError("kp must be non-negative")
        if self.mode is not ActuationMode.RIGID and not self.springs:
            raise DomainError("spring modes need at least one spring assembly")
        s_lo, s_hi = self.leg.s_range
        self.latch.within(s_lo, s_hi)

    @property
    def lossless(self) -> bool:
        return (self.bushing_mu == 0 and self.viscous_damping == 0
                and self.string_efficiency == 1.0)

    def with_mode(self, mode) -> "RobotConfig":
        return replace(self, mode=ActuationMode.parse(mode))

    def make_lossless(self) -> "RobotConfig":
        return replace(self, bushing_mu=0.0, viscous_damping=0.0, string_efficiency=1.0)


@dataclass(frozen=True)
class SimState:
    """Continuous and discrete state of the stance phase.

    ``y`` and ``v`` are the hip height above the foot contact and its rate.
    The accumulators hold motor shaft work, DC energy and dissipated energy
    since the start of the run.
    """

    t: float
    y: float
    v: float
    theta_m: float
    omega_m: float
    phi_in: float
    phi_out: float
    latch: LatchState
    in_stance: bool = True
    omega_in: float = 0.0
    omega_out: float = 0.0
    output_locked: bool = True
    string_slack: bool = False
    motor_work: float = 0.0
    electrical_energy: float = 0.0
    dissipated: float = 0.0


@dataclass
class JumpResult:
    mode: ActuationMode
    outcome: str
    takeoff_energy: float
    propulsion_time: float
    loading_time: float
    apex_height: float
    liftoff_time: float
    liftoff_velocity: float
    liftoff_height: float
    rest_height: float
    release_time: Optional[float]
    avg_dc_power: float
    electrical_energy: float
    motor_work: float
    energy_residual: float
    max_step_residual: float
    traces: dict
    events: list

    @property
    def lifted_off(self) -> bool:
        return self.outcome == LIFTOFF


def ballistic_apex(takeoff_energy: float, vertical_fraction: float, mass: float,
                   gravity: float = 9.81) -> float:
    """Rise of the centre of mass above its takeoff height."""
    if not mass > 0:
        raise DomainError("mass must be positive")
    if not 0.0 <= vertical_fraction <= 1.0:
        raise DomainError("vertical_fraction must lie in [0, 1]")
    return vertical_fraction * takeoff_energy / (mass * gravity)


# -- packing ----------------------------------------------------------------

class _Packed:
    """Arrays handed to the kernel; built once per config."""

    def __init__(self, config: RobotConfig):
        self.config = config
        table = elastica_table()
        self.coeffs = np.ascontiguousarray(table.coeffs)
        dx = float(table.strain[1] - table.strain[0])
        n = table.strain.size
        cum = np.zeros(n)
        for i in range(n - 1):
            c = table.coeffs[:, i]
            cum[i + 1] = cum[i] + (((c[0] * dx / 4 + c[1] / 3) * dx + c[2] / 2) * dx + c[3]) * dx
        self.cum = cum

        packs = np.zeros((len(config.springs), K.N_PACK_COLS))
        for k, assy in enumerate(config.springs):
            g, st = assy.geometry, assy.strip
            db = buckling_shortening(st)
            row = packs[k]
            row[K.PK_L1], row[K.PK_L2], row[K.PK_L0] = g.L1, g.L2, st.free_length
            row[K.PK_REST] = g.phi_rest
            row[K.PK_KAX] = st.axial_stiffness
            row[K.PK_PCR] = critical_load(st)
            row[K.PK_DB] = db
            row[K.PK_EB] = 0.5 * st.axial_stiffness * db * db
            row[K.PK_IB] = K.elastica_integral(db / st.free_length, self.coeffs, cum, dx, n)
        self.packs = packs

        leg = config.leg
        s_lo, s_hi = leg.s_range
        s_nodes = np.linspace(s_lo, s_hi, _LEG_NODES)
        self.leg_table = np.array([(leg_extension(leg, s), _edge_ratio(leg, s, s_lo, s_hi))
                                   for s in s_nodes])

        motor = config.motor.aggregate(config.n_motors)
        tsa = config.tsa
        p = np.zeros(K.N_PARAMS)
        p[K.MASS], p[K.GRAV] = config.mass, config.gravity
        p[K.J_M], p[K.KT], p[K.KV_RAD] = motor.rotor_inertia, motor.kt, motor.kv_rad
        p[K.R_W], p[K.V_BUS], p[K.I_MAX] = motor.winding_resistance, motor.v_bus, motor.i_max
        p[K.L_S], p[K.R_S], p[K.R_P] = tsa.string_length, tsa.string_radius, tsa.pulley_radius
        p[K.TH0] = tsa.theta_0
        p[K.PHI0] = s_lo
        p[K.K_STR], p[K.ETA], p[K.J_IN] = config.string_stiffness, config.string_efficiency, config.input_inertia
        p[K.K_BAND], p[K.BAND_REST] = config.band.stiffness, config.band.rest_angle
        p[K.MU], p[K.R_B] = config.bushing_mu, config.bushing_radius
        p[K.EPS_W] = 0.05
        p[K.C_VISC], p[K.K_STOP] = config.viscous_damping, config.stop_stiffness
        psi_max = min((a.geometry.phi_rest - a.geometry.phi_min) for a in config.springs) \
            if config.springs else 0.0
        p[K.PSI_MAX] = psi_max
        p[K.S_MIN], p[K.S_MAX] = s_lo, s_hi
        p[K.REL_ANGLE] = config.latch.release_angle
        p[K.KP], p[K.TARGET] = config.kp, config.kp_target
        p[K.T_MAX] = config.t_max
        p[K.E_DX], p[K.E_N] = dx, n
        p[K.LEG_S0], p[K.LEG_H], p[K.LEG_N] = s_lo, s_nodes[1] - s_nodes[0], _LEG_NODES
        p[K.DT] = min(config.dt, self._stable_step())
        p[K.EV_TOL] = config.event_tol
        p[K.REC_DT] = config.record_dt
        p[K.AUDIT] = 1.0 if config.energy_check else 0.0
        p[K.AUDIT_TOL] = config.energy_check_tol
        p[K.AUDIT_FLOOR] = 1e-2
        self.p = p
        self.duty_t = np.array(config.duty_times)
        self.duty_v = np.array(config.duty_values)

    def _stable_step(self) -> float:
        """Step size that keeps RK4 accurate on the stiffest local mode."""
        c = self.config
        k = c.stop_stiffness + c.string_stiffness * c.tsa.pulley_radius ** 2
        if c.mode is not ActuationMode.RIGID:
            for assy in c.springs:
                g = assy.geometry
                arm = g.L1 * g.L2 * math.sin(g.phi_rest) / assy.strip.free_length
                k += assy.strip.axial_stiffness * arm * arm
        omega = math.sqrt(k / c.input_inertia)
        return 0.5 / omega

    def initial(self, mode: ActuationMode):
        c = self.config
        s_lo = c.leg.s_range[0]
        y = np.zeros(K.N_STATE)
        y[0] = c.tsa.theta_0
        y[2] = s_lo
        y[4] = s_lo
        flags = np.zeros(5, dtype=np.int64)
        flags[K.F_MODE] = {ActuationMode.RIGID: K.MODE_RIGID, ActuationMode.SEA: K.MODE_SEA,
                           ActuationMode.PEA: K.MODE_PEA}[mode]
        flags[K.F_LATCHED] = 1 if (mode is ActuationMode.PEA and c.latch.latched) else 0
        flags[K.F_STANCE] = 1
        return y, flags

    def args(self):
        return (self.p, self.packs, self.coeffs, self.cum, self.leg_table, self.duty_t, self.duty_v)


def _edge_ratio(leg, s, lo, hi):
    # the joint limits are not singular, so evaluate slightly inside them
    return transmission_ratio(leg, min(max(s, lo + 1e-9), hi - 1e-9))


def _start(packed: _Packed, mode):
    """Initial state with the latch and crouch-stop logic applied at t=0."""
    y, flags = packed.initial(mode)
    ev_t = np.zeros(64)
    ev_c = np.zeros(64, dtype=np.int64)
    events = []
    if flags[K.F_LATCHED] == 1 and y[2] >= packed.p[K.REL_ANGLE]:
        flags[K.F_LATCHED] = 0
        events.append((0.0, "release"))
    if flags[K.F_LATCHED] == 0:
        K.unlock_if_loaded(0.0, y, flags, *packed.args())
        if flags[K.F_LOCKED] == 0:
            events.append((0.0, "unlock"))
    return y, flags, ev_t, ev_c, events


# -- public API -------------------------------------------------------------

def _to_state(packed, t, y, flags, latch_template):
    xi, T, _ = K.leg_eval(y[4], packed.leg_table, packed.p[K.LEG_S0], packed.p[K.LEG_H], _LEG_NODES)
    if flags[K.F_LATCHED] == 1:
        latch = replace(latch_template, phase=LatchPhase.LATCHED, armed=True)
    else:
        latch = replace(latch_template, phase=LatchPhase.RELEASED, armed=False)
    return SimState(t=float(t), y=float(xi), v=float(T * y[5]), theta_m=float(y[0]),
                    omega_m=float(y[1]), phi_in=float(y[2]), phi_out=float(y[4]), latch=latch,
                    in_stance=bool(flags[K.F_STANCE]), omega_in=float(y[3]),
                    omega_out=float(y[5]), output_locked=bool(flags[K.F_LOCKED] or flags[K.F_LATCHED]),
                    string_slack=bool(flags[K.F_SLACK]), motor_work=float(y[6]),
                    electrical_energy=float(y[7]), dissipated=float(y[8]))


def _from_state(packed, state: SimState, mode):
    y = np.array([state.theta_m, state.omega_m, state.phi_in, state.omega_in, state.phi_out,
                  state.omega_out, state.motor_work, state.electrical_energy, state.dissipated])
    flags = np.zeros(5, dtype=np.int64)
    flags[K.F_MODE] = {ActuationMode.RIGID: K.MODE_RIGID, ActuationMode.SEA: K.MODE_SEA,
                       ActuationMode.PEA: K.MODE_PEA}[mode]
    flags[K.F_LATCHED] = 1 if (mode is ActuationMode.PEA and state.latch.latched) else 0
    flags[K.F_LOCKED] = 1 if (state.output_locked and not flags[K.F_LATCHED]) else 0
    flags[K.F_STANCE] = 1 if state.in_stance else 0
    flags[K.F_SLACK] = 1 if state.string_slack else 0
    return y, flags


def initial_state(config: RobotConfig) -> SimState:
    """Crouched at rest on the ground with the string just taut."""
    packed = _Packed(config)
    y, flags, *_ = _start(packed, config.mode)
    return _to_state(packed, 0.0, y, flags, config.latch)


_step_cache = (None, None)


def _packed_for(config):
    # step() is usually called in a loop with one config; packing builds the
    # leg tables, so keep the last one (configs are frozen). The pair is
    # swapped as a whole so concurrent callers never see a mismatch.
    global _step_cache
    cached, packed = _step_cache
    if cached is not config:
        packed = _Packed(config)
        _step_cache = (config, packed)
    return packed


def step(config: RobotConfig, state: SimState, dt: float, _packed=None) -> SimState:
    """Advance ``state`` by ``dt`` (one RK4 step, split at any events).

    Stops early at liftoff; the returned ``t`` then marks the liftoff time.
    """
    if not dt > 0:
        raise DomainError("dt must be positive")
    if not state.in_stance:
        return state
    packed = _packed or _packed_for(config)
    y, flags = _from_state(packed, state, config.mode)
    ev_t = np.zeros(16)
    ev_c = np.zeros(16, dtype=np.int64)
    aux = np.empty(K.N_AUX)
    e_before = K.total_energy(state.t, y, flags, *packed.args(), aux) - y[6] + y[8]
    t, _, status = K.advance(state.t, y, flags, dt, *packed.args(), ev_t, ev_c, 0)
    if status == K.ST_OVERTWIST:
        raise OverTwistError("string twisted past its geometric limit")
    if config.lossless:
        e_after = K.total_energy(t, y, flags, *packed.args(), aux) - y[6] + y[8]
        injected = max(abs(y[6]), 1e-2)
        if abs(e_after - e_before) > config.energy_check_tol * injected:
            raise NumericalInstabilityError(
                f"energy residual {abs(e_after - e_before):.3g} J in one step at t={t:.6g} s")
    return _to_state(packed, t, y, flags, config.latch)


def simulate_jump(config: RobotConfig) -> JumpResult:
    """Run one jump from the crouch until liftoff (or ``t_max``)."""
    packed = _Packed(config)
    y, flags, ev_t, ev_c, events = _start(packed, config.mode)
    n_rows = int(config.t_max / config.record_dt) + 200
    trace = np.zeros((n_rows, K.N_TRACE_COLS))
    audit = config.energy_check or config.lossless
    p = packed.p
    p[K.AUDIT] = 1.0 if audit else 0.0
    t, rows, n_ev, status, worst = K.simulate(y, flags, *packed.args(), trace, ev_t, ev_c)
    if status == K.ST_OVERTWIST:
        raise OverTwistError(f"string twisted past its geometric limit at t={t:.4f} s")
    if status == K.ST_UNSTABLE:
        raise NumericalInstabilityError(
            f"energy residual jumped by more than {config.energy_check_tol:.0e} of the injected "
            f"energy in one step near t={t:.6g} s")
    if status == K.ST_OVERFLOW:
        raise RuntimeError("trace buffer overflow")
    trace = trace[:rows]
    events += [(float(ev_t[i]), EVENT_NAMES[int(ev_c[i])]) for i in range(n_ev)]
    return _summarize(config, packed, trace, events, status, y, worst)


def _summarize(config, packed, trace, events, status, y, worst):
    m, g = config.mass, config.gravity
    col = lambda c: trace[:, c].copy()
    traces = {
        "t_s": col(K.TR_T), "y_m": col(K.TR_Y), "v_mps": col(K.TR_V),
        "phi_in_rad": col(K.TR_PHI_IN), "phi_out_rad": col(K.TR_PHI_OUT),
        "grf_N": col(K.TR_GRF), "duty": col(K.TR_DUTY), "current_A": col(K.TR_CURRENT),
        "dc_power_W": col(K.TR_PDC), "spring_energy_J": col(K.TR_SPRING_E),
        "tension_N": col(K.TR_TENSION), "theta_m_rad": col(K.TR_THETA),
        "omega_m_radps": col(K.TR_OMEGA), "energy_residual_J": col(K.TR_RESIDUAL),
    }
    codes = trace[:, K.TR_EVENT].astype(int)
    traces["event"] = np.array([EVENT_NAMES.get(c, "") for c in codes], dtype=object)
    y_rest = float(trace[0, K.TR_Y])
    onset = _onset(config)
    release = next((t for t, name in events if name == "release"), None)
    lifted = status == K.ST_LIFTOFF
    residual = float(trace[-1, K.TR_RESIDUAL])
    w_motor = float(y[6])
    if lifted:
        t_lo = float(trace[-1, K.TR_T])
        v_lo = float(trace[-1, K.TR_V])
        y_lo = float(trace[-1, K.TR_Y])
        energy = 0.5 * m * v_lo ** 2 + m * g * (y_lo - y_rest)
        t_prop = t_lo - onset
        loading = (release - onset) if (config.mode is ActuationMode.PEA and release is not None) else 0.0
        # the power average covers the phase that drives the body: from the
        # command onset for rigid/SEA and from the release for PEA
        start = release if (config.mode is ActuationMode.PEA and release is not None) else onset
        start_row = int(np.searchsorted(trace[:, K.TR_T], start))
        e_elec = float(y[7]) - float(trace[start_row, K.TR_E_ELEC])
        power = e_elec / (t_lo - start) if t_lo > start else 0.0
        apex = ballistic_apex(energy, 1.0, m, g) if energy > 0 else 0.0
        outcome = LIFTOFF
    else:
        t_lo = v_lo = y_lo = float("nan")
        energy = t_prop = loading = power = apex = 0.0
        outcome = NO_LIFTOFF
    return JumpResult(
        mode=config.mode, outcome=outcome, takeoff_energy=energy, propulsion_time=t_prop,
        loading_time=loading, apex_height=apex, liftoff_time=t_lo, liftoff_velocity=v_lo,
        liftoff_height=y_lo, rest_height=y_rest, release_time=release, avg_dc_power=power,
        electrical_energy=float(y[7]), motor_work=w_motor,
        energy_residual=residual / max(abs(w_motor), 1e-12), max_step_residual=worst,
        traces=traces, events=events)


def _onset(config):
    for t, d in zip(config.duty_times, config.duty_values):
        if d > 0:
            return t
    return 0.0


def compare_modes(config: RobotConfig) -> list:
    """Run Rigid, SEA and PEA with otherwise identical parameters."""
    rows = []
    for mode in (ActuationMode.RIGID, ActuationMode.SEA, ActuationMode.PEA):
        res = simulate_jump(config.with_mode(mode))
        rows.append({
            "mode": mode.value,
            "outcome": res.outcome,
            "energy_J": res.takeoff_energy,
            "time_ms": res.propulsion_time * 1e3,
            "avg_dc_power_W": res.avg_dc_power,
            "loading_ms": res.loading_time * 1e3,
            "apex_m": res.apex_height,
            "result": res,
        })
    return rows
