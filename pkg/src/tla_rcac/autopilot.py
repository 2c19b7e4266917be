"""Fixed-gain three-loop autopilot (F-TLA).

    u = K_q q + integral(K_theta q + K_a (a_z_ref - K_az a_z)) dt
"""
from dataclasses import dataclass, replace

GAIN_NAMES = ("K_q", "K_theta", "K_a", "K_az")


@dataclass(frozen=True)
class TlaGains:
    K_q: float = 0.464
    K_theta: float = 15.62474
    K_a: float = 0.2446459
    K_az: float = 0.9278

    def as_tuple(self):
        return (self.K_q, self.K_theta, self.K_a, self.K_az)


@dataclass
class TlaState:
    integrator: float = 0.0


def tla_integrand(gains, q, a_z, a_z_ref):
    return gains.K_theta * q + gains.K_a * (a_z_ref - gains.K_az * a_z)


def tla_output(gains, tla, q):
    return gains.K_q * q + tla.integrator


def scale_gains(gains, alpha_tla, mask=GAIN_NAMES):
    """Multiply the gains named in ``mask`` (default: all four) by ``alpha_tla``."""
    unknown = set(mask) - set(GAIN_NAMES)
    if unknown:
        raise ValueError(f"unknown gain names {sorted(unknown)}")
    return replace(gains, **{n: getattr(gains, n) * alpha_tla for n in mask})
