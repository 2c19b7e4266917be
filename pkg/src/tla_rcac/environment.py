"""ISA troposphere: density, speed of sound and temperature vs altitude."""
from dataclasses import dataclass
import math

from ._jit import njit

T0 = 288.15  # K
LAPSE = 0.0065  # K/m
RHO0 = 1.225  # kg/m^3
R_AIR = 287.053  # J/(kg K)
GAMMA_AIR = 1.4
G0 = 9.80665  # m/s^2
H_MAX = 11000.0  # m, tropopause

_DENSITY_EXPONENT = G0 / (LAPSE * R_AIR) - 1.0


class AtmosphereDomainError(ValueError):
    """Altitude outside the modeled troposphere segment."""


@dataclass(frozen=True)
class AtmosphereState:
    density: float
    speed_of_sound: float
    temperature: float


@njit
def isa_kernel(h):
    """Return (rho, a, T); NaNs outside [0, 11000] m."""
    if not (0.0 <= h <= H_MAX):
        return math.nan, math.nan, math.nan
    T = T0 - LAPSE * h
    rho = RHO0 * (T / T0) ** _DENSITY_EXPONENT
    a = math.sqrt(GAMMA_AIR * R_AIR * T)
    return rho, a, T


def isa_at(altitude):
    """Standard atmosphere at ``altitude`` metres (troposphere only)."""
    h = float(altitude)
    if not (0.0 <= h <= H_MAX):
        raise AtmosphereDomainError(
            f"altitude {h!r} m outside ISA troposphere [0, {H_MAX:g}] m")
    rho, a, T = isa_kernel(h)
    return AtmosphereState(density=rho, speed_of_sound=a, temperature=T)
