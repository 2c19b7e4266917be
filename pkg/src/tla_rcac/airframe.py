"""Planar missile longitudinal dynamics, polynomial aerodynamics, fin actuator, IMU.

State vector order used by all kernels::

    0 mach, 1 gamma, 2 theta, 3 q, 4 h, 5 X, 6 delta, 7 delta_dot

All angles are radians. Normal acceleration ``a_z`` is measured along the
body z-axis (positive down), the same sense as the guidance command.
"""
from dataclasses import dataclass, fields, replace
import math

import numpy as np

from ._jit import njit
from .environment import G0, isa_at, isa_kernel

N_STATE = 8

# parameter-array layout shared by the kernels
I_AN, I_BN, I_CN, I_DN, I_AA = 0, 1, 2, 3, 4
I_AM, I_BM, I_CM, I_DM, I_EM = 5, 6, 7, 8, 9
I_MASS, I_S, I_D, I_IY, I_DIMU, I_WA, I_ZETA = 10, 11, 12, 13, 14, 15, 16
N_PARAMS = 17

ALPHA_COEFFS = ("a_N", "b_N", "c_N", "a_M", "b_M", "c_M")
FIN_COEFFS = ("d_N", "d_M")


@dataclass(frozen=True)
class MissileParams:
    a_N: float = -19.373
    b_N: float = 31.023
    c_N: float = 9.717
    d_N: float = 1.948
    a_A: float = 0.3005
    a_M: float = 40.440
    b_M: float = -64.015
    c_M: float = 2.922
    d_M: float = -11.803
    e_M: float = -1.719
    m: float = 204.0227
    S: float = 0.0409
    d: float = 0.2286
    I_y: float = 247.4336
    d_imu: float = 0.5
    omega_a: float = 150.0
    zeta: float = 0.7

    def __post_init__(self):
        for name in ("m", "S", "d", "I_y", "omega_a"):
            if not getattr(self, name) > 0:
                raise ValueError(f"MissileParams.{name} must be > 0")
        if not 0 < self.zeta < 1:
            raise ValueError("MissileParams.zeta must lie in (0, 1)")

    def to_array(self):
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=np.float64)

    def scaled(self, kind, factor):
        """Copy with the angle-of-attack or fin-deflection coefficients scaled."""
        if kind == "angle_of_attack":
            names = ALPHA_COEFFS
        elif kind == "fin_deflection":
            names = FIN_COEFFS
        else:
            raise ValueError(f"unknown coefficient group {kind!r}")
        return replace(self, **{n: getattr(self, n) * factor for n in names})


@dataclass(frozen=True)
class MissileState:
    mach: float
    gamma: float
    theta: float
    q: float
    h: float
    X: float
    delta: float = 0.0
    delta_dot: float = 0.0

    def to_array(self):
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=np.float64)

    @classmethod
    def from_array(cls, y):
        return cls(*(float(v) for v in y[:N_STATE]))

    @property
    def alpha(self):
        return self.theta - self.gamma


@dataclass(frozen=True)
class FlightCondition:
    alpha: float
    mach: float
    dyn_pressure: float

    @classmethod
    def from_state(cls, state):
        atm = isa_at(state.h)
        V = state.mach * atm.speed_of_sound
        return cls(state.theta - state.gamma, state.mach, 0.5 * atm.density * V * V)


@dataclass(frozen=True)
class AeroCoeffs:
    C_N: float
    C_A: float
    C_M: float


@dataclass(frozen=True)
class AeroLoads:
    f_n: float
    f_a: float
    moment: float


@dataclass(frozen=True)
class ImuOutput:
    a_z: float
    q: float


@njit
def aero_kernel(alpha, mach, delta, q, p):
    abs_a = abs(alpha)
    a3 = alpha * alpha * alpha
    c_n = (p[I_AN] * a3 + p[I_BN] * alpha * abs_a
           + p[I_CN] * (2.0 - mach / 3.0) * alpha + p[I_DN] * delta)
    c_m = (p[I_AM] * a3 + p[I_BM] * alpha * abs_a
           + p[I_CM] * (8.0 * mach / 3.0 - 7.0) * alpha
           + p[I_DM] * delta + p[I_EM] * q)
    return c_n, p[I_AA], c_m


@njit
def airframe_rhs(y, thrust, fin_cmd, p, out):
    """Write the 8 airframe derivatives into ``out[:8]``; return a_z (body-down)."""
    mach = y[0]
    gam = y[1]
    q = y[3]
    h = y[4]
    delta = y[6]
    ddot = y[7]
    rho, a, _ = isa_kernel(h)
    alpha = y[2] - gam
    c_n, c_a, c_m = aero_kernel(alpha, mach, delta, q, p)
    m = p[I_MASS]
    S = p[I_S]
    sa = math.sin(alpha)
    ca = math.cos(alpha)
    sg = math.sin(gam)
    cg = math.cos(gam)
    k = rho * a * mach * S / (2.0 * m)
    out[0] = (thrust / (m * a) * ca - G0 / a * sg
              - k * mach * (c_n * sa + c_a * ca))
    out[1] = (thrust / (m * a * mach) * sa - G0 / (a * mach) * cg
              + k * (c_n * ca - c_a * sa))
    out[2] = q
    qdot = rho * a * a * mach * mach * S * p[I_D] * c_m / (2.0 * p[I_IY])
    out[3] = qdot
    out[4] = mach * a * sg
    out[5] = mach * a * cg
    wa = p[I_WA]
    out[6] = ddot
    out[7] = wa * wa * (fin_cmd - delta) - 2.0 * p[I_ZETA] * wa * ddot
    a_cg = -rho * a * a * mach * mach * S * c_n / (2.0 * m)
    return a_cg - qdot * p[I_DIMU]


@njit
def accel_kernel(y, p):
    """Sensed (a_z, q_dot) at the IMU; neither depends on the fin command."""
    rho, a, _ = isa_kernel(y[4])
    c_n, _, c_m = aero_kernel(y[2] - y[1], y[0], y[6], y[3], p)
    v2 = a * a * y[0] * y[0]
    qdot = rho * v2 * p[I_S] * p[I_D] * c_m / (2.0 * p[I_IY])
    a_cg = -rho * v2 * p[I_S] * c_n / (2.0 * p[I_MASS])
    return a_cg - qdot * p[I_DIMU], qdot


def aero_coeffs(cond, delta, q, params):
    c_n, c_a, c_m = aero_kernel(float(cond.alpha), float(cond.mach), float(delta),
                                float(q), params.to_array())
    return AeroCoeffs(c_n, c_a, c_m)


def aero_loads(cond, coeffs, params):
    qs = cond.dyn_pressure * params.S
    return AeroLoads(qs * coeffs.C_N, qs * coeffs.C_A, qs * params.d * coeffs.C_M)


def state_derivative(state, thrust, fin_cmd, params):
    """Time derivative of every MissileState field (returned as a MissileState)."""
    isa_at(state.h)
    if not state.mach > 0:
        raise ValueError("mach must be positive")
    out = np.empty(N_STATE)
    airframe_rhs(state.to_array(), float(thrust), float(fin_cmd), params.to_array(), out)
    return MissileState.from_array(out)


def imu_outputs(state, thrust, fin_cmd, params):
    # thrust and fin command do not reach a_z instantaneously; accepted for interface symmetry
    isa_at(state.h)
    a_z, _ = accel_kernel(state.to_array(), params.to_array())
    return ImuOutput(a_z=a_z, q=state.q)


def cg_normal_accel(rho, a, mach, c_n, params):
    """Magnitude of the aerodynamic normal acceleration at the CG (upward for C_N > 0)."""
    return rho * a * a * mach * mach * params.S * c_n / (2.0 * params.m)
