"""Planar pursuit-evasion kinematics and proportional navigation."""
from dataclasses import dataclass
import bisect
import math

import numpy as np

from ._jit import njit
from .environment import G0

EVADER_KINDS = {"ballistic": 0, "straight": 1, "weave": 2}


class StallError(ArithmeticError):
    pass


@dataclass(frozen=True)
class PointMass:
    V: float
    gamma: float
    d: float
    h: float
    m: float = 1.0

    def to_array(self):
        return np.array([self.V, self.gamma, self.d, self.h], dtype=np.float64)


@dataclass(frozen=True)
class Engagement:
    pursuer: PointMass
    evader: PointMass
    lambda_pn: float = 4.0

    @property
    def R(self):
        return los_state((self.pursuer.d, self.pursuer.h), (self.evader.d, self.evader.h))[0]

    @property
    def beta(self):
        return los_state((self.pursuer.d, self.pursuer.h), (self.evader.d, self.evader.h))[1]


@dataclass(frozen=True)
class EvaderProfile:
    kind: str = "straight"
    amplitude: float = 0.0  # m/s^2, weave only
    omega: float = 0.0  # rad/s, weave only
    constant_speed: bool = False

    def __post_init__(self):
        if self.kind not in EVADER_KINDS:
            raise ValueError(f"unknown evader profile {self.kind!r}; "
                             f"expected one of {sorted(EVADER_KINDS)}")

    def code(self):
        return EVADER_KINDS[self.kind]


@dataclass(frozen=True)
class ThrustProfile:
    """Piecewise-constant thrust; each breakpoint value holds until the next."""
    breakpoints: tuple = ((0.0, 15000.0), (10.0, 2000.0), (20.0, 0.0))

    def __post_init__(self):
        times = [b[0] for b in self.breakpoints]
        if not self.breakpoints:
            raise ValueError("thrust profile needs at least one breakpoint")
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ValueError("thrust breakpoints must be strictly increasing in time")
        if any(v < 0 for _, v in self.breakpoints):
            raise ValueError("thrust values must be non-negative")

    @classmethod
    def constant(cls, value):
        return cls(((0.0, float(value)),))

    def __call__(self, t):
        times = [b[0] for b in self.breakpoints]
        i = bisect.bisect_right(times, t) - 1
        return self.breakpoints[max(i, 0)][1] if i >= 0 else 0.0


@njit
def los_kernel(d_p, h_p, d_e, h_e):
    dx = d_e - d_p
    dh = h_e - h_p
    return math.hypot(dx, dh), math.atan2(dh, dx)


@njit
def los_rate_kernel(R, beta, v_p, gam_p, v_e, gam_e):
    return (v_p * math.sin(beta - gam_p) - v_e * math.sin(beta - gam_e)) / R


@njit
def range_rate_kernel(d_p, h_p, v_p, gam_p, d_e, h_e, v_e, gam_e):
    dx = d_e - d_p
    dh = h_e - h_p
    R = math.hypot(dx, dh)
    if R == 0.0:
        return 0.0
    return (dx * (v_e * math.cos(gam_e) - v_p * math.cos(gam_p))
            + dh * (v_e * math.sin(gam_e) - v_p * math.sin(gam_p))) / R


@njit
def pn_kernel(lam, d_p, h_p, v_p, gam_p, d_e, h_e, v_e, gam_e):
    """Body-down normal acceleration command of the pursuer."""
    R, beta = los_kernel(d_p, h_p, d_e, h_e)
    bdot = los_rate_kernel(R, beta, v_p, gam_p, v_e, gam_e)
    return -lam * v_p * bdot - G0 * math.cos(gam_p)


@njit
def evader_nz_kernel(kind, amp, omega, t, gam_e):
    if kind == 0:
        return 0.0
    n = -G0 * math.cos(gam_e)
    if kind == 2:
        n += amp * math.sin(omega * t)
    return n


@njit
def point_mass_kernel(v, gam, accel_along, n_z, out, offset):
    """out[offset:offset+4] = d/dt (V, gamma, d, h)."""
    out[offset] = accel_along - G0 * math.sin(gam)
    out[offset + 1] = -(n_z + G0 * math.cos(gam)) / v
    out[offset + 2] = v * math.cos(gam)
    out[offset + 3] = v * math.sin(gam)


@njit
def evader_rhs_into(t, ye, kind, amp, omega, const_speed, out, offset):
    v = ye[0]
    gam = ye[1]
    n = evader_nz_kernel(kind, amp, omega, t, gam)
    point_mass_kernel(v, gam, 0.0, n, out, offset)
    if const_speed:
        out[offset] = 0.0


# ideal pursuer parameter layout
IP_LAMBDA, IP_MASS, IP_THRUST, IP_DRAG = 0, 1, 2, 3
IP_EV_KIND, IP_EV_AMP, IP_EV_OMEGA, IP_EV_CONST = 4, 5, 6, 7
IP_NZ = 8  # PN command held over the guidance sample
N_IDEAL_PARAMS = 9


@njit
def ideal_rhs(t, y, p):
    """Point-mass PN pursuer (y[0:4]) and evader (y[4:8]).

    The pursuer realizes the held command p[IP_NZ] exactly; no autopilot lag.
    """
    out = np.empty(8)
    point_mass_kernel(y[0], y[1], (p[IP_THRUST] - p[IP_DRAG]) / p[IP_MASS], p[IP_NZ],
                      out, 0)
    evader_rhs_into(t, y[4:8], int(p[IP_EV_KIND]), p[IP_EV_AMP], p[IP_EV_OMEGA],
                    p[IP_EV_CONST] != 0.0, out, 4)
    return out


def los_state(pursuer_pos, evader_pos):
    """(R, beta) from pursuer and evader (downrange, altitude) positions."""
    return los_kernel(float(pursuer_pos[0]), float(pursuer_pos[1]),
                      float(evader_pos[0]), float(evader_pos[1]))


def los_rate(engagement):
    P, E = engagement.pursuer, engagement.evader
    R, beta = los_state((P.d, P.h), (E.d, E.h))
    if R == 0.0:
        raise ZeroDivisionError("zero range: interception")
    return los_rate_kernel(R, beta, P.V, P.gamma, E.V, E.gamma)


def pn_accel_command(engagement):
    """PN normal-acceleration command n_z,P (positive along body-down)."""
    P = engagement.pursuer
    if not P.V > 0:
        raise StallError("pursuer speed must be positive")
    return -engagement.lambda_pn * P.V * los_rate(engagement) - G0 * math.cos(P.gamma)


def point_mass_derivative(pm, thrust, drag, n_z):
    if not pm.V > 0:
        raise StallError(f"point-mass speed {pm.V} is not positive")
    out = np.empty(4)
    point_mass_kernel(pm.V, pm.gamma, (thrust - drag) / pm.m, n_z, out, 0)
    return PointMass(*out, m=pm.m)


def evader_profile(kind, t, pm, amplitude=0.0, omega=0.0):
    """Evader normal acceleration for a named maneuver profile."""
    if kind not in EVADER_KINDS:
        raise ValueError(f"unknown evader profile {kind!r}")
    return evader_nz_kernel(EVADER_KINDS[kind], amplitude, omega, t, pm.gamma)
