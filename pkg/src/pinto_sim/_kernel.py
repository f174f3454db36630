"""Compiled stance-phase integrator.

Everything the inner loop touches is packed into flat float arrays so numba
can compile one specialization. The Python side (``jumpdyn``) builds those
arrays from the config objects and unpacks the results.

State vector ``y``::

    0 theta    motor twist angle (aggregate shaft)
    1 omega    motor speed
    2 phi_in   input link angle, cooperative coordinate
    3 w_in     input link speed
    4 s        output link angle (leg cooperative coordinate)
    5 w_out    output link speed
    6 w_motor  accumulated motor shaft work
    7 e_elec   accumulated DC electrical energy
    8 e_diss   accumulated dissipated energy

In rigid mode input and output are one body; entries 2/3 and 4/5 then carry
identical values.
"""
import math

import numpy as np
from numba import njit

# parameter slots
MASS, GRAV, J_M, KT, KV_RAD, R_W, V_BUS, I_MAX = 0, 1, 2, 3, 4, 5, 6, 7
L_S, R_S, R_P, TH0, PHI0, K_STR, ETA, J_IN = 8, 9, 10, 11, 12, 13, 14, 15
K_BAND, BAND_REST, MU, R_B, EPS_W, C_VISC, K_STOP, PSI_MAX = 16, 17, 18, 19, 20, 21, 22, 23
S_MIN, S_MAX, REL_ANGLE, KP, TARGET, T_MAX = 24, 25, 26, 27, 28, 29
E_DX, E_N, LEG_S0, LEG_H, LEG_N = 30, 31, 32, 33, 34
DT, EV_TOL, REC_DT, AUDIT, AUDIT_TOL, AUDIT_FLOOR = 35, 36, 37, 38, 39, 40
N_PARAMS = 41

# pack columns
PK_L1, PK_L2, PK_L0, PK_REST, PK_KAX, PK_PCR, PK_DB, PK_EB, PK_IB = range(9)
N_PACK_COLS = 9

# flags
F_MODE, F_LATCHED, F_LOCKED, F_STANCE, F_SLACK = 0, 1, 2, 3, 4
MODE_RIGID, MODE_SEA, MODE_PEA = 0, 1, 2

# event codes
EV_RELEASE, EV_UNLOCK, EV_LIFTOFF, EV_RELOCK, EV_SLACK, EV_TAUT = 1, 2, 3, 4, 5, 6

# status codes
ST_RUNNING, ST_LIFTOFF, ST_TIMEOUT, ST_UNSTABLE, ST_OVERTWIST, ST_OVERFLOW = 0, 1, 2, 3, 4, 5

# aux outputs of the right-hand side
AX_GRF, AX_DUTY, AX_CURRENT, AX_PDC, AX_TENSION, AX_STRETCH, AX_NET_OUT, AX_SPRING_E = range(8)
N_AUX = 8

# trace columns
TR_T, TR_Y, TR_V, TR_PHI_IN, TR_PHI_OUT, TR_GRF, TR_DUTY, TR_CURRENT, TR_PDC = range(9)
TR_SPRING_E, TR_TENSION, TR_THETA, TR_OMEGA, TR_EVENT, TR_RESIDUAL, TR_E_ELEC = 9, 10, 11, 12, 13, 14, 15
N_TRACE_COLS = 16

N_STATE = 9


@njit(cache=True)
def elastica_ratio(x, coeffs, dx, n):
    if x <= 0.0:
        return 1.0
    xmax = dx * (n - 1)
    if x >= xmax:
        i = n - 2
        h = dx
    else:
        i = int(x / dx)
        if i > n - 2:
            i = n - 2
        h = x - i * dx
    return ((coeffs[0, i] * h + coeffs[1, i]) * h + coeffs[2, i]) * h + coeffs[3, i]


@njit(cache=True)
def elastica_integral(x, coeffs, cum, dx, n):
    """Integral of the load ratio from 0 to ``x``; constant slope past the table."""
    if x <= 0.0:
        return x
    xmax = dx * (n - 1)
    extra = 0.0
    if x > xmax:
        extra = (x - xmax) * elastica_ratio(xmax, coeffs, dx, n)
        x = xmax
    i = int(x / dx)
    if i > n - 2:
        i = n - 2
    h = x - i * dx
    seg = (((coeffs[0, i] * h / 4.0 + coeffs[1, i] / 3.0) * h + coeffs[2, i] / 2.0) * h
           + coeffs[3, i]) * h
    return cum[i] + seg + extra


@njit(cache=True)
def pack_state(pk, psi, coeffs, cum, dx, n):
    """Torque, stored energy and axial force of one pack at compression ``psi``."""
    L1 = pk[PK_L1]
    L2 = pk[PK_L2]
    l0 = pk[PK_L0]
    phi = pk[PK_REST] - psi
    c = math.sqrt(max(L1 * L1 + L2 * L2 - 2.0 * L1 * L2 * math.cos(phi), 1e-30))
    delta = l0 - c
    if delta <= 0.0:
        return 0.0, 0.0, 0.0
    arm = L1 * L2 * math.sin(phi) / c
    if delta <= pk[PK_DB]:
        force = pk[PK_KAX] * delta
        energy = 0.5 * pk[PK_KAX] * delta * delta
    else:
        x = delta / l0
        force = pk[PK_PCR] * elastica_ratio(x, coeffs, dx, n)
        energy = pk[PK_EB] + pk[PK_PCR] * l0 * (elastica_integral(x, coeffs, cum, dx, n) - pk[PK_IB])
    return force * arm, energy, force


@njit(cache=True)
def leg_eval(s, leg, s0, h, n):
    """Hermite interpolation of extension; returns (xi, T, dT/ds)."""
    u = (s - s0) / h
    i = int(math.floor(u))
    if i < 0:
        i = 0
    elif i > n - 2:
        i = n - 2
    t = u - i
    x0 = leg[i, 0]
    x1 = leg[i + 1, 0]
    m0 = leg[i, 1] * h
    m1 = leg[i + 1, 1] * h
    t2 = t * t
    t3 = t2 * t
    xi = (2 * t3 - 3 * t2 + 1) * x0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * x1 + (t3 - t2) * m1
    dxi = ((6 * t2 - 6 * t) * x0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * x1
           + (3 * t2 - 2 * t) * m1) / h
    ddxi = ((12 * t - 6) * x0 + (6 * t - 4) * m0 + (-12 * t + 6) * x1 + (6 * t - 2) * m1) / (h * h)
    return xi, dxi, ddxi


@njit(cache=True)
def contraction(theta, p):
    tr = theta * p[R_S]
    L = p[L_S]
    rad = L * L - tr * tr
    if rad <= 0.0:
        return L, 1e30, False
    root = math.sqrt(rad)
    return tr * tr / (L + root), theta * p[R_S] * p[R_S] / root, True


@njit(cache=True)
def duty_at(t, phi_in, p, duty_t, duty_v):
    d = duty_v[0]
    for k in range(duty_t.shape[0]):
        if t >= duty_t[k]:
            d = duty_v[k]
    if p[KP] > 0.0:
        u = p[KP] * (p[TARGET] - phi_in)
        d *= min(max(u, 0.0), 1.0)
    return d


@njit(cache=True)
def sat(x):
    if x > 1.0:
        return 1.0
    if x < -1.0:
        return -1.0
    return x


@njit(cache=True)
def rhs(t, y, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, dy, aux):
    """Time derivative of ``y``. Returns False on over-twist."""
    theta = y[0]
    omega = y[1]
    phi_in = y[2]
    w_in = y[3]
    s = y[4]
    w_out = y[5]
    mode = flags[F_MODE]
    held = flags[F_LATCHED] == 1 or flags[F_LOCKED] == 1

    duty = duty_at(t, phi_in, p, duty_t, duty_v)
    cur = (duty * p[V_BUS] - omega / p[KV_RAD]) / p[R_W]
    if cur > p[I_MAX]:
        cur = p[I_MAX]
    elif cur < -p[I_MAX]:
        cur = -p[I_MAX]
    tau_m = p[KT] * cur
    # the controller throttles to hold the current limit, so the bus sees the
    # duty that produces this current
    duty_eff = min(max((cur * p[R_W] + omega / p[KV_RAD]) / p[V_BUS], 0.0), 1.0)
    p_dc = duty_eff * p[V_BUS] * abs(cur)

    dx, G, ok = contraction(theta, p)
    dx0, _, _ = contraction(p[TH0], p)
    stretch = (dx - dx0) - p[R_P] * (phi_in - p[PHI0])
    tension = p[K_STR] * stretch if stretch > 0.0 else 0.0
    tau_str = p[ETA] * tension * p[R_P]
    tau_band = -p[K_BAND] * max(phi_in - p[BAND_REST], 0.0)

    xi, T, dT = leg_eval(s, leg, p[LEG_S0], p[LEG_H], int(p[LEG_N]))
    m = p[MASS]
    g = p[GRAV]

    dy[0] = omega
    dy[1] = (tau_m - tension * G) / p[J_M]
    dy[6] = tau_m * omega
    dy[7] = p_dc
    diss = (1.0 - p[ETA]) * tension * p[R_P] * w_in

    spring_e = 0.0
    if mode == MODE_RIGID:
        q = tau_str + tau_band - 2.0 * p[C_VISC] * w_out - m * g * T
        if held:
            acc = 0.0
            dy[2] = 0.0
            dy[4] = 0.0
            grf = m * g
        else:
            acc = (q - m * T * dT * w_out * w_out) / (p[J_IN] + m * T * T)
            dy[2] = w_out
            dy[4] = w_out
            grf = m * (T * acc + dT * w_out * w_out + g)
        dy[3] = acc
        dy[5] = acc
        diss += 2.0 * p[C_VISC] * w_out * w_out
        net_out = q
    else:
        psi = phi_in - s
        q_spring = 0.0
        f_int = 0.0
        for k in range(packs.shape[0]):
            tq, en, fa = pack_state(packs[k], psi, coeffs, cum, p[E_DX], int(p[E_N]))
            q_spring += tq
            spring_e += en
            f_int += fa
        # hard stops on the relative angle, as stiff one-sided springs
        if psi < 0.0:
            q_spring += p[K_STOP] * psi
            spring_e += 0.5 * p[K_STOP] * psi * psi
        elif psi > p[PSI_MAX]:
            e = psi - p[PSI_MAX]
            q_spring += p[K_STOP] * e
            spring_e += 0.5 * p[K_STOP] * e * e
        fric = p[MU] * p[R_B] * f_int
        f_in = fric * sat(w_in / p[EPS_W])
        f_out = fric * sat(w_out / p[EPS_W])
        dy[2] = w_in
        dy[3] = (tau_str + tau_band - q_spring - f_in - p[C_VISC] * w_in) / p[J_IN]
        diss += f_in * w_in + p[C_VISC] * w_in * w_in
        net_out = q_spring - m * g * T
        if held:
            dy[4] = 0.0
            dy[5] = 0.0
            grf = m * g
        else:
            q = q_spring - f_out - p[C_VISC] * w_out - m * g * T
            acc = (q - m * T * dT * w_out * w_out) / (m * T * T)
            dy[4] = w_out
            dy[5] = acc
            grf = m * (T * acc + dT * w_out * w_out + g)
            diss += f_out * w_out + p[C_VISC] * w_out * w_out
    dy[8] = diss

    aux[AX_GRF] = grf
    aux[AX_DUTY] = duty_eff
    aux[AX_CURRENT] = cur
    aux[AX_PDC] = p_dc
    aux[AX_TENSION] = tension
    aux[AX_STRETCH] = stretch
    aux[AX_NET_OUT] = net_out
    aux[AX_SPRING_E] = spring_e
    return ok


@njit(cache=True)
def total_energy(t, y, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, aux):
    """Mechanical energy stored in the system, including rotor and string."""
    dy = np.empty(N_STATE)
    rhs(t, y, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, dy, aux)
    xi, T, _ = leg_eval(y[4], leg, p[LEG_S0], p[LEG_H], int(p[LEG_N]))
    e = 0.5 * p[J_M] * y[1] * y[1]
    e += 0.5 * p[J_IN] * y[3] * y[3]
    e += 0.5 * p[MASS] * T * T * y[5] * y[5]
    e += p[MASS] * p[GRAV] * xi
    st = aux[AX_STRETCH]
    if st > 0.0:
        e += 0.5 * p[K_STR] * st * st
    b = y[2] - p[BAND_REST]
    if b > 0.0:
        e += 0.5 * p[K_BAND] * b * b
    e += aux[AX_SPRING_E]
    return e


@njit(cache=True)
def rk4(t, y, h, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, out, aux):
    k1 = np.empty(N_STATE)
    k2 = np.empty(N_STATE)
    k3 = np.empty(N_STATE)
    k4 = np.empty(N_STATE)
    tmp = np.empty(N_STATE)
    ok = rhs(t, y, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, k1, aux)
    for i in range(N_STATE):
        tmp[i] = y[i] + 0.5 * h * k1[i]
    ok &= rhs(t + 0.5 * h, tmp, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, k2, aux)
    for i in range(N_STATE):
        tmp[i] = y[i] + 0.5 * h * k2[i]
    ok &= rhs(t + 0.5 * h, tmp, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, k3, aux)
    for i in range(N_STATE):
        tmp[i] = y[i] + h * k3[i]
    ok &= rhs(t + h, tmp, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, k4, aux)
    for i in range(N_STATE):
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return ok


@njit(cache=True)
def event_values(t, y, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, g):
    """Fill ``g`` with the event functions; each fires when it becomes >= 0."""
    aux = np.empty(N_AUX)
    dy = np.empty(N_STATE)
    rhs(t, y, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, dy, aux)
    mode = flags[F_MODE]
    for i in range(g.shape[0]):
        g[i] = -1.0
    held = flags[F_LATCHED] == 1 or flags[F_LOCKED] == 1
    if mode == MODE_PEA and flags[F_LATCHED] == 1:
        g[0] = y[2] - p[REL_ANGLE]
    if flags[F_LOCKED] == 1 and flags[F_LATCHED] == 0:
        # a tiny margin keeps the output from unlocking on round-off
        g[1] = aux[AX_NET_OUT] - 1e-12
    if not held:
        xi, T, _ = leg_eval(y[4], leg, p[LEG_S0], p[LEG_H], int(p[LEG_N]))
        if T * y[5] > 0.0:
            g[2] = -aux[AX_GRF]
        g[3] = y[4] - p[S_MAX]
        if y[5] < 0.0:
            g[4] = p[S_MIN] - y[4]
    # slack toggles either way; sign chosen from the current flag
    if flags[F_SLACK] == 1:
        g[5] = aux[AX_STRETCH]
    else:
        g[5] = -aux[AX_STRETCH] - 1e-15


@njit(cache=True)
def crossed(g0, g1):
    for i in range(g0.shape[0]):
        if g0[i] < 0.0 and g1[i] >= 0.0:
            return True
    return False


@njit(cache=True)
def unlock_if_loaded(t, y, flags, p, packs, coeffs, cum, leg, duty_t, duty_v):
    aux = np.empty(N_AUX)
    dy = np.empty(N_STATE)
    flags[F_LOCKED] = 1
    rhs(t, y, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, dy, aux)
    if aux[AX_NET_OUT] - 1e-12 >= 0.0:
        flags[F_LOCKED] = 0


@njit(cache=True)
def apply_events(t, y, flags, g0, g1, p, packs, coeffs, cum, leg, duty_t, duty_v, ev_codes):
    """Apply every event that crossed; returns the number recorded."""
    n = 0
    if g0[0] < 0.0 and g1[0] >= 0.0:
        flags[F_LATCHED] = 0
        ev_codes[n] = EV_RELEASE
        n += 1
        y[5] = 0.0
        unlock_if_loaded(t, y, flags, p, packs, coeffs, cum, leg, duty_t, duty_v)
    if g0[1] < 0.0 and g1[1] >= 0.0:
        flags[F_LOCKED] = 0
        ev_codes[n] = EV_UNLOCK
        n += 1
    if (g0[2] < 0.0 and g1[2] >= 0.0) or (g0[3] < 0.0 and g1[3] >= 0.0):
        flags[F_STANCE] = 0
        ev_codes[n] = EV_LIFTOFF
        n += 1
    elif g0[4] < 0.0 and g1[4] >= 0.0:
        # inelastic stop at the crouch; the output's kinetic energy is lost
        xi, T, _ = leg_eval(y[4], leg, p[LEG_S0], p[LEG_H], int(p[LEG_N]))
        ke = 0.5 * p[MASS] * T * T * y[5] * y[5]
        if flags[F_MODE] == MODE_RIGID:
            ke += 0.5 * p[J_IN] * y[3] * y[3]
            y[3] = 0.0
            y[2] = p[S_MIN]
        y[8] += ke
        y[5] = 0.0
        y[4] = p[S_MIN]
        ev_codes[n] = EV_RELOCK
        n += 1
        unlock_if_loaded(t, y, flags, p, packs, coeffs, cum, leg, duty_t, duty_v)
    if g0[5] < 0.0 and g1[5] >= 0.0:
        if flags[F_SLACK] == 1:
            flags[F_SLACK] = 0
            ev_codes[n] = EV_TAUT
        else:
            flags[F_SLACK] = 1
            ev_codes[n] = EV_SLACK
        n += 1
    return n


@njit(cache=True)
def advance(t, y, flags, h_total, p, packs, coeffs, cum, leg, duty_t, duty_v,
            ev_t, ev_c, n_ev):
    """Integrate over ``h_total`` with event location; stops early at liftoff.

    Returns ``(t, n_ev, status)``.
    """
    g0 = np.empty(6)
    g1 = np.empty(6)
    y1 = np.empty(N_STATE)
    ym = np.empty(N_STATE)
    aux = np.empty(N_AUX)
    codes = np.empty(8, dtype=np.int64)
    remaining = h_total
    while remaining > 0.0:
        h = remaining
        event_values(t, y, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, g0)
        ok = rk4(t, y, h, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, y1, aux)
        if not ok:
            return t, n_ev, ST_OVERTWIST
        event_values(t + h, y1, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, g1)
        if not crossed(g0, g1):
            for i in range(N_STATE):
                y[i] = y1[i]
            t += h
            remaining -= h
            continue
        lo = 0.0
        hi = h
        while hi - lo > p[EV_TOL]:
            mid = 0.5 * (lo + hi)
            rk4(t, y, mid, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, ym, aux)
            event_values(t + mid, ym, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, g1)
            if crossed(g0, g1):
                hi = mid
            else:
                lo = mid
        rk4(t, y, hi, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, y1, aux)
        event_values(t + hi, y1, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, g1)
        for i in range(N_STATE):
            y[i] = y1[i]
        t += hi
        remaining -= hi
        n = apply_events(t, y, flags, g0, g1, p, packs, coeffs, cum, leg, duty_t, duty_v, codes)
        for k in range(n):
            if n_ev < ev_t.shape[0]:
                ev_t[n_ev] = t
                ev_c[n_ev] = codes[k]
                n_ev += 1
        if flags[F_STANCE] == 0:
            return t, n_ev, ST_LIFTOFF
    return t, n_ev, ST_RUNNING


@njit(cache=True)
def record(trace, row, t, y, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, code, resid):
    aux = np.empty(N_AUX)
    dy = np.empty(N_STATE)
    rhs(t, y, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, dy, aux)
    xi, T, _ = leg_eval(y[4], leg, p[LEG_S0], p[LEG_H], int(p[LEG_N]))
    trace[row, TR_T] = t
    trace[row, TR_Y] = xi
    trace[row, TR_V] = T * y[5]
    trace[row, TR_PHI_IN] = y[2]
    trace[row, TR_PHI_OUT] = y[4]
    trace[row, TR_GRF] = aux[AX_GRF] if flags[F_STANCE] == 1 else 0.0
    trace[row, TR_DUTY] = aux[AX_DUTY]
    trace[row, TR_CURRENT] = aux[AX_CURRENT]
    trace[row, TR_PDC] = aux[AX_PDC]
    trace[row, TR_SPRING_E] = aux[AX_SPRING_E]
    trace[row, TR_TENSION] = aux[AX_TENSION]
    trace[row, TR_THETA] = y[0]
    trace[row, TR_OMEGA] = y[1]
    trace[row, TR_EVENT] = code
    trace[row, TR_RESIDUAL] = resid
    trace[row, TR_E_ELEC] = y[7]


@njit(cache=True)
def simulate(y, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, trace, ev_t, ev_c):
    """Run the stance phase from ``y`` until liftoff or ``T_MAX``.

    Returns ``(t, n_rows, n_events, status, max_step_residual)``.
    """
    aux = np.empty(N_AUX)
    t = 0.0
    n_ev = 0
    row = 0
    dt = p[DT]
    e0 = total_energy(t, y, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, aux)
    resid = 0.0
    worst = 0.0
    record(trace, row, t, y, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, 0, 0.0)
    row += 1
    next_rec = p[REC_DT]
    status = ST_RUNNING
    steps = 0
    while status == ST_RUNNING:
        if t >= p[T_MAX] - 1e-15:
            status = ST_TIMEOUT
            break
        h = min(dt, p[T_MAX] - t)
        # step counting keeps the grid exact instead of accumulating t += dt
        target = (steps + 1) * dt
        if target <= p[T_MAX] and target > t:
            h = target - t
        ev_before = n_ev
        t, n_ev, status = advance(t, y, flags, h, p, packs, coeffs, cum, leg, duty_t, duty_v,
                                  ev_t, ev_c, n_ev)
        steps += 1
        if status == ST_OVERTWIST:
            break
        e = total_energy(t, y, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, aux)
        new_resid = e - e0 - y[6] + y[8]
        jump = abs(new_resid - resid)
        scale = max(y[6], p[AUDIT_FLOOR])
        if jump / scale > worst:
            worst = jump / scale
        resid = new_resid
        if p[AUDIT] > 0.0 and jump > p[AUDIT_TOL] * scale:
            status = ST_UNSTABLE
        code = ev_c[n_ev - 1] if n_ev > ev_before else 0
        if code != 0 or t >= next_rec - 1e-12 or status != ST_RUNNING:
            if row >= trace.shape[0]:
                status = ST_OVERFLOW
                break
            record(trace, row, t, y, flags, p, packs, coeffs, cum, leg, duty_t, duty_v, code, resid)
            row += 1
            while next_rec <= t + 1e-12:
                next_rec += p[REC_DT]
    return t, row, n_ev, status, worst
