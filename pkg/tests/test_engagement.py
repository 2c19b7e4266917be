import math

import numpy as np
import pytest

from tla_rcac.engagement import EngagementScenario, run_engagement
from tla_rcac.guidance import EvaderProfile
from tla_rcac.rcac import RcacConfig
from tla_rcac.simcore import ControllerStack


@pytest.fixture(scope="module")
def ideal():
    return run_engagement()


def test_ideal_intercepts(ideal):
    assert ideal.closed_out and ideal.abort_cause is None
    assert ideal.miss_distance < 5.0
    assert 5.0 < ideal.flight_time < 15.0


def test_geometry_consistency(ideal):
    tr = ideal.trajectory
    R = np.hypot(tr["evader_d"] - tr["d"], tr["evader_h"] - tr["h"])
    beta = np.arctan2(tr["evader_h"] - tr["h"], tr["evader_d"] - tr["d"])
    assert np.max(np.abs(R - tr["R"])) <= 1e-9
    assert np.max(np.abs(beta - tr["beta"])) <= 1e-9


def test_refined_miss_not_above_logged(ideal):
    assert ideal.miss_distance <= ideal.trajectory["R"].min()
    assert ideal.trajectory.meta["closest_approach"]["R"] == ideal.miss_distance


def test_straight_evader_is_a_line(ideal):
    tr = ideal.trajectory
    d, h = tr["evader_d"], tr["evader_h"]
    fit = np.polyval(np.polyfit(d, h, 1), d)
    assert np.max(np.abs(fit - h)) <= 1e-6 * np.max(np.abs(h))
    assert (h[1] - h[0]) / (d[1] - d[0]) == pytest.approx(math.tan(math.radians(15)))


def test_coincident_start():
    sc = EngagementScenario(evader_d=0.0, evader_h=3000.0)
    res = run_engagement(sc)
    assert (res.miss_distance, res.flight_time) == (0.0, 0.0)


def test_weaving_evader_intercepted():
    sc = EngagementScenario(evader_profile=EvaderProfile("weave", 20.0, 0.5))
    res = run_engagement(sc)
    assert res.miss_distance < 5.0


def test_timeout_reports_final_range():
    # evader far out of reach within one second
    sc = EngagementScenario(evader_d=20000.0, t_final=1.0)
    res = run_engagement(sc)
    assert not res.closed_out
    assert res.miss_distance == res.trajectory["R"][-1]
    assert res.flight_time == pytest.approx(1.0)


def test_pursuer_kind_checks():
    with pytest.raises(ValueError):
        run_engagement(pursuer="laser")
    with pytest.raises(ValueError):
        run_engagement(pursuer="F-TLA")
    with pytest.raises(ValueError):
        run_engagement(pursuer="F-TLA", controller=ControllerStack(rcac=RcacConfig()))


@pytest.mark.slow
def test_missile_pursuer_intercepts():
    res = run_engagement(pursuer="F-TLA", controller=ControllerStack())
    assert res.closed_out and res.abort_cause is None
    assert res.miss_distance < 5.0
    tr = res.trajectory
    R = np.hypot(tr["evader_d"] - tr["X"], tr["evader_h"] - tr["h"])
    assert np.max(np.abs(R - tr["R"])) <= 1e-9
    assert res.miss_distance <= tr["R"].min()
