"""Closed-loop right-hand side: airframe, continuous TLA integrator, optional evader."""
import numpy as np

from ._jit import njit
from .airframe import N_PARAMS, N_STATE, accel_kernel, airframe_rhs
from .guidance import evader_rhs_into

# loop-parameter layout, appended after the airframe parameters
L_KQ = N_PARAMS
L_KTH = N_PARAMS + 1
L_KA = N_PARAMS + 2
L_KAZ = N_PARAMS + 3
L_AREF = N_PARAMS + 4
L_UA = N_PARAMS + 5
L_THRUST = N_PARAMS + 6
L_CLAMP = N_PARAMS + 7
L_HAS_EV = N_PARAMS + 8
L_EV_KIND = N_PARAMS + 9
L_EV_AMP = N_PARAMS + 10
L_EV_OMEGA = N_PARAMS + 11
L_EV_CONST = N_PARAMS + 12
N_LOOP_PARAMS = N_PARAMS + 13

I_TLA = N_STATE  # index of the TLA integrator in the loop state
N_LOOP_STATE = N_STATE + 1
EV0 = N_LOOP_STATE  # first evader index when present


@njit
def fin_command(y, p):
    """Total fin command u = K_q q + integral + held adaptive increment."""
    u = p[L_KQ] * y[3] + y[I_TLA] + p[L_UA]
    lim = p[L_CLAMP]
    if lim > 0.0:
        u = min(lim, max(-lim, u))
    return u


@njit
def loop_rhs(t, y, p):
    out = np.zeros(y.shape[0])
    u = fin_command(y, p)
    a_z = airframe_rhs(y, p[L_THRUST], u, p, out)
    out[I_TLA] = p[L_KTH] * y[3] + p[L_KA] * (p[L_AREF] - p[L_KAZ] * a_z)
    if p[L_HAS_EV] != 0.0:
        evader_rhs_into(t, y[EV0:EV0 + 4], int(p[L_EV_KIND]), p[L_EV_AMP],
                        p[L_EV_OMEGA], p[L_EV_CONST] != 0.0, out, EV0)
    return out


@njit
def sensed(y, p):
    """(a_z, q_dot, u) at the current loop state."""
    a_z, qdot = accel_kernel(y, p)
    return a_z, qdot, fin_command(y, p)
