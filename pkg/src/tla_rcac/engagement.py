"""Planar interception runs: ideal PN pursuer or the full missile under F-TLA / A-TLA."""
from dataclasses import dataclass, field
import math

import numpy as np

from . import _loop_kernel as lk
from .airframe import MissileParams, MissileState
from .environment import H_MAX, isa_at, isa_kernel
from .guidance import (IP_DRAG, IP_EV_AMP, IP_EV_CONST, IP_EV_KIND, IP_EV_OMEGA, IP_LAMBDA,
                       IP_MASS, IP_NZ, IP_THRUST, N_IDEAL_PARAMS, EvaderProfile, PointMass,
                       StallError, ThrustProfile, ideal_rhs, los_kernel, pn_kernel,
                       range_rate_kernel)
from .integrate import IntegrationError, IntegratorConfig, advance
from .simcore import (ClosedLoop, EvaderSetup, LoopConfig, Plant, SimulationError,
                      Trajectory)

PURSUER_KINDS = ("ideal", "F-TLA", "A-TLA")
REFINE_TOL = 1e-4  # s, bisection tolerance on the closest-approach time
IDEAL_COLUMNS = ("t", "V", "gamma", "d", "h", "n_z")


@dataclass(frozen=True)
class EngagementScenario:
    pursuer_mach: float = 0.5
    pursuer_gamma: float = 0.0
    pursuer_h: float = 3000.0
    pursuer_d: float = 0.0
    evader_mach: float = 0.85
    evader_gamma: float = math.radians(15.0)
    evader_h: float = 4000.0
    evader_d: float = 1000.0
    evader_profile: EvaderProfile = field(default_factory=EvaderProfile)
    thrust: ThrustProfile = field(default_factory=ThrustProfile)
    lambda_pn: float = 4.0
    ideal_drag: float = 0.0  # N
    t_final: float = 30.0

    def evader(self):
        a = isa_at(self.evader_h).speed_of_sound
        return PointMass(self.evader_mach * a, self.evader_gamma, self.evader_d,
                         self.evader_h)

    def pursuer_state(self):
        return MissileState(mach=self.pursuer_mach, gamma=self.pursuer_gamma,
                            theta=self.pursuer_gamma, q=0.0, h=self.pursuer_h,
                            X=self.pursuer_d)


@dataclass(frozen=True)
class EngagementResult:
    """``closed_out`` is True when closest approach was reached before ``t_final``.

    A missile that departs controlled flight (non-finite state, integrator failure)
    ends the engagement: ``abort_cause`` is set and the miss distance is the closest
    range logged before departure.
    """
    trajectory: Trajectory
    miss_distance: float
    flight_time: float
    closed_out: bool
    abort_cause: str = None


def _closest_approach(state_at, rdot_of, t_lo, t_hi, tol=REFINE_TOL):
    """Bisection on the range-rate sign change inside [t_lo, t_hi] (offsets from t_lo)."""
    lo, hi = 0.0, t_hi - t_lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rdot_of(state_at(mid)) < 0.0:
            lo = mid
        else:
            hi = mid
    best = 0.5 * (lo + hi)
    return t_lo + best, state_at(best)


def run_engagement(scenario=None, pursuer="ideal", controller=None, params=None,
                   loop=None, cfg=None):
    """Fly one engagement to closest approach (or ``t_final``)."""
    scenario = scenario or EngagementScenario()
    if pursuer not in PURSUER_KINDS:
        raise ValueError(f"pursuer must be one of {PURSUER_KINDS}")
    loop = loop or LoopConfig()
    cfg = cfg or IntegratorConfig()
    params = params or MissileParams()
    if pursuer == "ideal":
        return _run_ideal(scenario, params, loop, cfg)
    if controller is None:
        raise ValueError("a ControllerStack is required for a missile pursuer")
    if (pursuer == "A-TLA") != controller.adaptive:
        raise ValueError(f"pursuer {pursuer!r} does not match controller.adaptive")
    return _run_missile(scenario, controller, params, loop, cfg)


def _run_ideal(sc, params, loop, cfg):
    a_p = isa_at(sc.pursuer_h).speed_of_sound
    ev = sc.evader()
    y = np.concatenate([[sc.pursuer_mach * a_p, sc.pursuer_gamma, sc.pursuer_d,
                         sc.pursuer_h], ev.to_array()])
    p = np.zeros(N_IDEAL_PARAMS)
    p[IP_LAMBDA] = sc.lambda_pn
    p[IP_MASS] = params.m
    p[IP_DRAG] = sc.ideal_drag
    prof = sc.evader_profile
    p[IP_EV_KIND] = prof.code()
    p[IP_EV_AMP] = prof.amplitude
    p[IP_EV_OMEGA] = prof.omega
    p[IP_EV_CONST] = float(prof.constant_speed)
    traj = Trajectory(0, engaging=True, base=IDEAL_COLUMNS)

    def rdot(v):
        return range_rate_kernel(v[2], v[3], v[0], v[1], v[6], v[7], v[4], v[5])

    def log(t, v):
        R, beta = los_kernel(v[2], v[3], v[6], v[7])
        n_z = pn_kernel(sc.lambda_pn, v[2], v[3], v[0], v[1], v[6], v[7], v[4], v[5]) \
            if R > 0 else 0.0
        traj.append((), t=t, V=v[0], gamma=v[1], d=v[2], h=v[3], n_z=n_z, R=R, beta=beta,
                    evader_d=v[6], evader_h=v[7])
        return R, n_z

    n = int(round(sc.t_final / loop.t_s))
    h_step = cfg.max_step
    t = 0.0
    for k in range(n + 1):
        t = k * loop.t_s
        R, p[IP_NZ] = log(t, y)
        if R == 0.0:
            return EngagementResult(traj, 0.0, t, True)
        if y[0] <= 0.0:
            raise StallError(f"ideal pursuer stalled at t={t:.4f} s")
        if k == n:
            break
        p[IP_THRUST] = sc.thrust(t + 0.5 * loop.t_s)
        r0 = rdot(y)
        try:
            y_next, h_step = advance(ideal_rhs, y, t, t + loop.t_s, cfg, p, h_step)
        except IntegrationError as exc:
            raise SimulationError(f"integration failed: {exc}", t, traj) from exc
        if r0 < 0.0 <= rdot(y_next):
            y0, t0 = y.copy(), t

            def state_at(dt):
                return advance(ideal_rhs, y0, t0, t0 + dt, cfg, p)[0] if dt > 0 else y0

            t_c, y_c = _closest_approach(state_at, rdot, t0, t0 + loop.t_s)
            R_c = math.hypot(y_c[6] - y_c[2], y_c[7] - y_c[3])
            traj.meta["closest_approach"] = {"t": t_c, "R": R_c}
            return EngagementResult(traj, R_c, t_c, True)
        y = y_next
    return EngagementResult(traj, traj["R"][-1], t, False)


def _missile_kinematics(y):
    a = isa_kernel(y[4])[1]
    return y[0] * a, y[1], y[5], y[4]


def _run_missile(sc, controller, params, loop, cfg):
    ev = sc.evader()
    lam = sc.lambda_pn
    e0 = lk.EV0

    def command(t, y):
        v, gam, d, h = _missile_kinematics(y)
        if math.hypot(y[e0 + 2] - d, y[e0 + 3] - h) == 0.0:
            return 0.0
        return pn_kernel(lam, d, h, v, gam, y[e0 + 2], y[e0 + 3], y[e0], y[e0 + 1])

    def rdot(y):
        v, gam, d, h = _missile_kinematics(y)
        return range_rate_kernel(d, h, v, gam, y[e0 + 2], y[e0 + 3], y[e0], y[e0 + 1])

    def rng(y):
        return math.hypot(y[e0 + 2] - y[5], y[e0 + 3] - y[4])

    plant = Plant(params=params, initial=sc.pursuer_state(), thrust=sc.thrust)
    sim = ClosedLoop(plant, controller, command, loop, cfg,
                     evader=EvaderSetup(ev, sc.evader_profile))
    traj = sim.trajectory
    n = int(round(sc.t_final / loop.t_s))
    for k in range(n + 1):
        try:
            sim.sample()
            if rng(sim.y) == 0.0:
                return EngagementResult(traj, 0.0, sim.t, True)
            if k == n:
                break
            r0 = rdot(sim.y)
            y_prev, t_prev = sim.y.copy(), sim.t
            sim.advance()
        except SimulationError as exc:
            return _departed(traj, exc)
        if r0 < 0.0 <= rdot(sim.y):
            def state_at(dt):
                if dt <= 0:
                    return y_prev
                return advance(lk.loop_rhs, y_prev, t_prev, t_prev + dt, sim.cfg, sim.p)[0]

            t_c, y_c = _closest_approach(state_at, rdot, t_prev, t_prev + loop.t_s)
            traj.meta["closest_approach"] = {"t": t_c, "R": rng(y_c)}
            return EngagementResult(traj, rng(y_c), t_c, True)
        if not 0.0 <= sim.y[e0 + 3] <= H_MAX:
            break
    return EngagementResult(traj, rng(sim.y), sim.t, False)


def _departed(traj, exc):
    R = traj["R"]
    if len(R) == 0:
        raise exc
    i = int(np.argmin(R))
    traj.meta["abort"] = {"cause": exc.cause, "t": exc.t}
    return EngagementResult(traj, float(R[i]), float(traj["t"][i]), False, exc.cause)
