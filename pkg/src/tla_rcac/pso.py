"""Global-best particle swarm optimization and the RCAC hyperparameter objective."""
from dataclasses import dataclass, field
import logging
import math

import numpy as np

from .environment import G0
from .rcac import RcacConfig
from .simcore import ControllerStack, LoopConfig, Plant, SimulationError, run_closed_loop

log = logging.getLogger(__name__)

QDOT_MAX = math.radians(3.0)  # rad/s^2
HYPER_BOUNDS = ((0.0, 20.0), (0.0, 15.0))  # (R_u, log10 R_theta)
TRAINING_DURATION = 11.0  # s; spans the first command reversal, stays below 11 km


@dataclass(frozen=True)
class PsoConfig:
    swarm_size: int = 20
    iterations: int = 50
    bounds: tuple = HYPER_BOUNDS
    w: float = 0.729
    c1: float = 1.49445
    c2: float = 1.49445
    seed: int = 0

    def __post_init__(self):
        if self.swarm_size < 1:
            raise ValueError("swarm_size must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        for lo, hi in self.bounds:
            if not lo < hi:
                raise ValueError(f"bounds need lo < hi, got ({lo}, {hi})")

    @property
    def dim(self):
        return len(self.bounds)


@dataclass
class PsoHistory:
    positions: list = field(default_factory=list)  # (swarm, dim) per iteration
    costs: list = field(default_factory=list)  # (swarm,) per iteration
    best_position: list = field(default_factory=list)
    best_cost: list = field(default_factory=list)


def pso_cost(traj):
    """Per-sample mean of (2/g)|z| plus the pitch-acceleration excess penalty."""
    z = np.asarray(traj["z"])
    qdot = np.asarray(traj["qdot"])
    if z.size == 0:
        raise ValueError("pso_cost needs a non-empty trajectory")
    excess = np.maximum(np.abs(qdot) - QDOT_MAX, 0.0)
    return float(np.mean(2.0 / G0 * np.abs(z) + 0.2 * excess))


def training_command(t):
    """Square-wave acceleration command; sign(0) is taken as 0."""
    return 0.5 * G0 - 8.0 * G0 * float(np.sign(math.sin(0.3 * t)))


def _safe_eval(objective, x):
    try:
        c = float(objective(x))
    except (ArithmeticError, SimulationError, ValueError) as exc:
        log.info("objective failed at %s: %s", x, exc)
        return math.inf
    if not math.isfinite(c):
        log.info("non-finite objective at %s rejected", x)
        return math.inf
    return c


def optimize(objective, cfg=None, map_fn=map):
    """Minimize ``objective`` over the box ``cfg.bounds``.

    ``map_fn`` may be a parallel map; it must return results in input order.
    Returns (best_position, best_cost, history).
    """
    cfg = cfg or PsoConfig()
    rng = np.random.default_rng(cfg.seed)
    lo = np.array([b[0] for b in cfg.bounds], dtype=np.float64)
    hi = np.array([b[1] for b in cfg.bounds], dtype=np.float64)
    n, dim = cfg.swarm_size, cfg.dim
    x = lo + rng.random((n, dim)) * (hi - lo)
    v = (rng.random((n, dim)) - 0.5) * (hi - lo) * 0.2
    hist = PsoHistory()

    def evaluate(pos):
        return np.array(list(map_fn(lambda p: _safe_eval(objective, p), list(pos))))

    cost = evaluate(x)
    p_best, p_cost = x.copy(), cost.copy()
    g = int(np.argmin(p_cost))
    g_best, g_cost = p_best[g].copy(), p_cost[g]
    _record(hist, x, cost, g_best, g_cost)
    for _ in range(cfg.iterations - 1):
        r1 = rng.random((n, dim))
        r2 = rng.random((n, dim))
        v = cfg.w * v + cfg.c1 * r1 * (p_best - x) + cfg.c2 * r2 * (g_best - x)
        x = x + v
        clipped = (x < lo) | (x > hi)
        x = np.clip(x, lo, hi)
        v[clipped] = 0.0
        cost = evaluate(x)
        better = cost < p_cost
        p_best[better] = x[better]
        p_cost[better] = cost[better]
        g = int(np.argmin(p_cost))
        if p_cost[g] < g_cost:
            g_best, g_cost = p_best[g].copy(), p_cost[g]
        _record(hist, x, cost, g_best, g_cost)
    return g_best, float(g_cost), hist


def _record(hist, x, cost, g_best, g_cost):
    hist.positions.append(x.copy())
    hist.costs.append(cost.copy())
    hist.best_position.append(g_best.copy())
    hist.best_cost.append(float(g_cost))


def hyper_to_rcac(position, base=None):
    """Map a (R_u, log10 R_theta) search point onto an RcacConfig."""
    base = base or RcacConfig()
    r_u, log_rt = float(position[0]), float(position[1])
    return RcacConfig(n_c=base.n_c, R_z=base.R_z, R_u=r_u, R_theta=10.0 ** log_rt,
                      lam=base.lam, theta_0=base.theta_0)


def tuning_objective(plant=None, gains=None, loop=None, base=None, **controller_kw):
    """Objective of (R_u, log10 R_theta): cost of an A-TLA run on the training command."""
    plant = plant or Plant()
    loop = loop or LoopConfig(t_final=TRAINING_DURATION)

    def objective(position):
        ctl = ControllerStack(rcac=hyper_to_rcac(position, base), **(
            {"gains": gains} if gains is not None else {}), **controller_kw)
        traj = run_closed_loop(plant, ctl, lambda t, y: training_command(t), loop)
        return pso_cost(traj)

    return objective
