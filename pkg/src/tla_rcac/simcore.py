"""Zero-order-hold closed-loop simulation of the missile with F-TLA / A-TLA.

Per controller step k (t_k = k * t_s):
  sample a_z, q; evaluate a_z_ref; update RCAC (A-TLA only) to get u_a;
  integrate plant + TLA integrator over [t_k, t_k+1] with a_z_ref, u_a and
  thrust held. u_TLA = K_q q + integral stays continuous inside the interval.
"""
from dataclasses import dataclass, field
import logging
import math

import numpy as np

from . import _loop_kernel as lk
from .airframe import MissileParams, MissileState, N_PARAMS
from .autopilot import TlaGains
from .environment import G0, H_MAX, isa_kernel
from .guidance import EvaderProfile, PointMass, ThrustProfile, los_kernel
from .integrate import IntegrationError, IntegratorConfig, advance
from .linearize import (DegenerateChannelError, FirFilter, build_gf, missile_model,
                        transmission_zeros)
from .rcac import RcacConfig, RcacError, RcacState, rcac_update

log = logging.getLogger(__name__)

Z_TAPS = ("error", "fig6")


class SimulationError(RuntimeError):
    """A closed-loop run aborted; ``trajectory`` holds the records logged so far."""

    def __init__(self, cause, t, trajectory=None):
        super().__init__(f"{cause} at t={t:.6g} s")
        self.cause = cause
        self.t = t
        self.trajectory = trajectory


@dataclass(frozen=True)
class LoopConfig:
    t_s: float = 0.005
    t_final: float = 10.0

    def __post_init__(self):
        if not self.t_s > 0:
            raise ValueError("t_s must be positive")
        if not self.t_final >= self.t_s:
            raise ValueError("t_final must be >= t_s")

    @property
    def n_steps(self):
        return int(round(self.t_final / self.t_s))


@dataclass(frozen=True)
class Plant:
    params: MissileParams = field(default_factory=MissileParams)
    initial: MissileState = None
    thrust: ThrustProfile = field(default_factory=lambda: ThrustProfile.constant(3800.0))

    def initial_state(self):
        return self.initial if self.initial is not None else default_initial_state()


def default_initial_state():
    """Mach 2.5, gamma = theta = 45 deg, q = 0, h = 3500 m, actuator at rest."""
    return MissileState(mach=2.5, gamma=math.radians(45.0), theta=math.radians(45.0),
                        q=0.0, h=3500.0, X=0.0)


@dataclass(frozen=True)
class ControllerStack:
    """F-TLA gains plus optional RCAC augmentation (``rcac=None`` -> F-TLA)."""
    gains: TlaGains = field(default_factory=TlaGains)
    rcac: RcacConfig = None
    z_tap: str = "error"
    min_nmp_zero: float = 1.0  # rad/s; slower RHP zeros are left out of G_f
    include_complex_zeros: bool = False
    u_clamp: float = 0.0  # rad; 0 disables

    def __post_init__(self):
        if self.z_tap not in Z_TAPS:
            raise ValueError(f"z_tap must be one of {Z_TAPS}")

    @property
    def adaptive(self):
        return self.rcac is not None


@dataclass(frozen=True)
class EvaderSetup:
    initial: PointMass
    profile: EvaderProfile = field(default_factory=EvaderProfile)


STATE_COLUMNS = ("mach", "gamma", "theta", "q", "h", "X", "delta", "delta_dot")


class Trajectory:
    """Column store of per-step records; ``traj["a_z"]`` returns a numpy array.

    ``traj["theta"]`` is the pitch angle; the adaptive gains are ``traj["theta_k"]``.
    """

    BASE = ("t",) + STATE_COLUMNS + ("V", "alpha", "u", "u_tla", "u_a", "a_z_ref", "a_z",
                                     "z", "qdot")
    ENGAGEMENT = ("R", "beta", "evader_d", "evader_h")

    def __init__(self, n_theta, engaging=False, base=None):
        self.n_theta = n_theta
        self.engaging = engaging
        self._cols = {name: [] for name in (base or self.BASE)}
        self._theta = []
        if engaging:
            for name in self.ENGAGEMENT:
                self._cols[name] = []
        self.meta = {}

    def append(self, theta_k, **values):
        for name, col in self._cols.items():
            col.append(float(values[name]))
        self._theta.append(np.array(theta_k, dtype=np.float64))

    def __len__(self):
        return len(self._cols["t"])

    def __getitem__(self, name):
        if name == "theta_k":
            return (np.array(self._theta) if self._theta
                    else np.zeros((0, self.n_theta)))
        return np.asarray(self._cols[name], dtype=np.float64)

    def columns(self):
        return tuple(self._cols)

    def states(self):
        return np.column_stack([self[c] for c in STATE_COLUMNS])


class ClosedLoop:
    """Stateful closed-loop stepper; ``run_closed_loop`` drives it to t_final."""

    def __init__(self, plant, controller, command_fn, loop=None, cfg=None, evader=None):
        self.plant = plant
        self.controller = controller
        self.command_fn = command_fn
        self.loop = loop or LoopConfig()
        self.cfg = cfg or IntegratorConfig()
        self.evader = evader

        p = np.zeros(lk.N_LOOP_PARAMS)
        p[:N_PARAMS] = plant.params.to_array()
        p[lk.L_KQ:lk.L_KAZ + 1] = controller.gains.as_tuple()
        p[lk.L_CLAMP] = controller.u_clamp
        n = lk.N_LOOP_STATE + (4 if evader else 0)
        y = np.zeros(n)
        y[:lk.N_STATE] = plant.initial_state().to_array()
        if evader:
            p[lk.L_HAS_EV] = 1.0
            p[lk.L_EV_KIND] = evader.profile.code()
            p[lk.L_EV_AMP] = evader.profile.amplitude
            p[lk.L_EV_OMEGA] = evader.profile.omega
            p[lk.L_EV_CONST] = float(evader.profile.constant_speed)
            y[lk.EV0:lk.EV0 + 4] = evader.initial.to_array()
        self.p = p
        self.y = y
        self.k = 0
        self.h = self.cfg.max_step
        rc = controller.rcac
        n_theta = rc.n_theta if rc else 2 * RcacConfig().n_c + 1
        self.rcac_state = RcacState.initial(rc) if rc else None
        self.theta = self.rcac_state.theta if rc else np.zeros(n_theta)
        self.filter = None
        self.u_a = 0.0
        self.trajectory = Trajectory(n_theta, engaging=evader is not None)

    @property
    def t(self):
        return self.k * self.loop.t_s

    def _fail(self, cause):
        raise SimulationError(cause, self.t, self.trajectory)

    def _update_filter(self, u_now):
        thrust = self.p[lk.L_THRUST]
        try:
            model = missile_model(self.y, thrust, u_now, self.p[:N_PARAMS])
            zeros = transmission_zeros(model)
            zeros = [z for z in zeros if abs(z) >= self.controller.min_nmp_zero]
            self.filter = build_gf(zeros, model, self.loop.t_s,
                                   self.controller.include_complex_zeros)
        except (DegenerateChannelError, ValueError, np.linalg.LinAlgError) as exc:
            if self.filter is None:
                self._fail(f"retrospective filter unavailable: {exc}")
            log.debug("t=%.4f: keeping previous G_f (%s)", self.t, exc)

    def sample(self):
        """Controller update at t_k; logs and returns nothing."""
        t = self.t
        y = self.y
        p = self.p
        if not np.isfinite(y).all():
            self._fail("non-finite state")
        if not 0.0 <= y[4] <= H_MAX:
            self._fail(f"altitude {y[4]:.1f} m left the ISA troposphere")
        p[lk.L_THRUST] = self.plant.thrust(t + 0.5 * self.loop.t_s)
        a_z, qdot, _ = lk.sensed(y, p)
        a_ref = float(self.command_fn(t, y))
        if not math.isfinite(a_ref):
            self._fail("non-finite acceleration command")
        if self.controller.z_tap == "error":
            z = a_ref - a_z
        else:
            z = a_ref - p[lk.L_KAZ] * a_z
        u_tla = p[lk.L_KQ] * y[3] + y[lk.I_TLA]
        if self.controller.adaptive:
            self._update_filter(u_tla + self.u_a)
            try:
                self.u_a, _ = rcac_update(self.rcac_state, self.controller.rcac, z,
                                          self.filter)
            except RcacError as exc:
                self._fail(f"RCAC update failed: {exc}")
            self.theta = self.rcac_state.theta
        p[lk.L_AREF] = a_ref
        p[lk.L_UA] = self.u_a
        u = lk.fin_command(y, p)
        if not math.isfinite(u):
            self._fail("non-finite fin command")
        a_sound = isa_kernel(y[4])[1]
        rec = dict(t=t, V=y[0] * a_sound, alpha=y[2] - y[1], u=u, u_tla=u_tla, u_a=self.u_a,
                   a_z_ref=a_ref, a_z=a_z, z=z, qdot=qdot)
        for i, name in enumerate(STATE_COLUMNS):
            rec[name] = y[i]
        if self.evader:
            R, beta = los_kernel(y[5], y[4], y[lk.EV0 + 2], y[lk.EV0 + 3])
            rec.update(R=R, beta=beta, evader_d=y[lk.EV0 + 2], evader_h=y[lk.EV0 + 3])
        self.trajectory.append(self.theta, **rec)

    def propagate(self, dt):
        """State at t_k + dt under the currently held inputs (no commit)."""
        y, _ = advance(lk.loop_rhs, self.y, self.t, self.t + dt, self.cfg, self.p,
                       self.h)
        return y

    def advance(self):
        t0 = self.t
        try:
            y, self.h = advance(lk.loop_rhs, self.y, t0, t0 + self.loop.t_s, self.cfg,
                                self.p, self.h)
        except IntegrationError as exc:
            self._fail(f"integration failed: {exc}")
        self.y = y
        self.k += 1


def run_closed_loop(plant, controller, command_fn, loop=None, cfg=None):
    """Simulate to ``loop.t_final``; one Trajectory record per controller step."""
    sim = ClosedLoop(plant, controller, command_fn, loop, cfg)
    n = sim.loop.n_steps
    for k in range(n + 1):
        sim.sample()
        if k < n:
            sim.advance()
    return sim.trajectory
