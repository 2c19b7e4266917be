import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tla_rcac.environment import G0
from tla_rcac.pso import (HYPER_BOUNDS, QDOT_MAX, PsoConfig, hyper_to_rcac, optimize,
                          pso_cost, training_command, tuning_objective)
from tla_rcac.rcac import RcacConfig
from tla_rcac.simcore import LoopConfig


def traj(z, qdot):
    return {"z": np.asarray(z, float), "qdot": np.asarray(qdot, float)}


def test_cost_examples():
    assert pso_cost(traj(np.zeros(5), np.full(5, QDOT_MAX))) == 0.0
    assert pso_cost(traj(np.full(7, G0 / 2), np.zeros(7))) == pytest.approx(1.0)
    assert pso_cost(traj([0.0], [QDOT_MAX + 1.0])) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        pso_cost(traj([], []))


def test_cost_is_per_sample_mean():
    z = np.linspace(-30, 30, 11)
    assert pso_cost(traj(z, z)) == pso_cost(traj(np.repeat(z, 1), np.repeat(z, 1)))
    assert pso_cost(traj(np.tile(z, 3), np.tile(z, 3))) == pytest.approx(pso_cost(traj(z, z)))


def test_training_command():
    assert training_command(1.0) == pytest.approx(-73.55, abs=5e-3)
    assert training_command(0.0) == 0.5 * G0
    assert training_command(2 * math.pi / 0.3 + 1.0) == training_command(1.0)
    assert training_command(12.0) == pytest.approx(8.5 * G0)


def sphere(x):
    return float(np.sum((np.asarray(x) - np.array([1.5, -2.0])) ** 2))


SPHERE = PsoConfig(swarm_size=30, iterations=100, bounds=((-10, 10), (-10, 10)), seed=4)


def test_sphere():
    best, cost, _ = optimize(sphere, SPHERE)
    assert np.linalg.norm(best - [1.5, -2.0]) < 1e-3
    assert cost == pytest.approx(sphere(best))


def test_determinism():
    _, _, h1 = optimize(sphere, SPHERE)
    _, _, h2 = optimize(sphere, SPHERE)
    assert all(np.array_equal(a, b) for a, b in zip(h1.positions, h2.positions))
    assert h1.best_cost == h2.best_cost


def test_single_particle():
    cfg = PsoConfig(swarm_size=1, iterations=30, bounds=((0.0, 5.0),), seed=1)
    _, _, h = optimize(lambda x: float(x[0]), cfg)
    assert all(b2 <= b1 for b1, b2 in zip(h.best_cost, h.best_cost[1:]))
    assert h.best_cost[-1] <= h.costs[0][0]


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 1000), st.integers(1, 8))
def test_monotone_and_in_bounds(seed, n):
    bounds = ((-1.0, 2.0), (3.0, 4.0))
    cfg = PsoConfig(swarm_size=n, iterations=15, bounds=bounds, seed=seed)
    _, _, h = optimize(lambda x: math.sin(5 * x[0]) + (x[1] - 3.3) ** 2, cfg)
    assert all(b2 <= b1 for b1, b2 in zip(h.best_cost, h.best_cost[1:]))
    for pos in h.positions:
        assert np.all(pos[:, 0] >= -1.0) and np.all(pos[:, 0] <= 2.0)
        assert np.all(pos[:, 1] >= 3.0) and np.all(pos[:, 1] <= 4.0)


def test_nonfinite_candidates_rejected():
    def obj(x):
        if x[0] < 0:
            return math.nan
        if x[0] < 0.5:
            raise ArithmeticError("diverged")
        return float(x[0])

    cfg = PsoConfig(swarm_size=6, iterations=10, bounds=((-1.0, 2.0),), seed=0)
    best, cost, h = optimize(obj, cfg)
    assert math.isfinite(cost) and best[0] >= 0.5
    assert any(np.isinf(c).any() for c in h.costs)


def test_config_validation():
    with pytest.raises(ValueError):
        PsoConfig(swarm_size=0)
    with pytest.raises(ValueError):
        PsoConfig(bounds=((1.0, 1.0),))


def test_hyper_mapping():
    rc = hyper_to_rcac((0.25427, 14.398), RcacConfig(n_c=3))
    assert rc.n_c == 3 and rc.R_u == 0.25427
    assert rc.R_theta == pytest.approx(10 ** 14.398)
    assert HYPER_BOUNDS == ((0.0, 20.0), (0.0, 15.0))


def test_tuning_objective_short_run():
    obj = tuning_objective(loop=LoopConfig(t_final=0.5))
    c = obj((0.25427, 14.398))
    assert math.isfinite(c) and c > 0
    assert obj((0.25427, 14.398)) == c
