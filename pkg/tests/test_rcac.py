import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tla_rcac.linearize import FirFilter
from tla_rcac.rcac import (RcacConfig, RcacError, RcacState, batch_cost, batch_minimizer,
                           build_regressor, filter_signal, rcac_update)


def test_regressor_zero():
    st_ = RcacState.initial(RcacConfig(n_c=3))
    assert np.array_equal(build_regressor(st_), np.zeros(7))


def test_regressor_assembly():
    s = RcacState.initial(RcacConfig(n_c=2))
    s.u_hist[:2] = (0.1, 0.2)
    s.z_hist[:] = (1.0, -1.0)
    s.gamma = 3.0
    assert build_regressor(s).tolist() == [0.1, 0.2, 1.0, -1.0, 3.0]


def test_gamma_is_running_sum():
    cfg = RcacConfig(n_c=1)
    s = RcacState.initial(cfg)
    for z in (1.0, 2.0):
        rcac_update(s, cfg, z, FirFilter.unit_delay())
    assert s.gamma == 3.0
    assert s.z_hist.tolist() == [2.0]


def test_infinite_prior_freezes():
    cfg = RcacConfig(n_c=2, R_theta=1e30)
    s = RcacState.initial(cfg)
    rng = np.random.default_rng(1)
    for z in rng.normal(size=50):
        u, s = rcac_update(s, cfg, z, FirFilter((1, 2), (1.0, -0.3)))
        assert abs(u) < 1e-20
        assert np.max(np.abs(s.theta)) < 1e-20


def test_scalar_closed_form():
    # one gain: regressor is [u_{k-1}, z_{k-1}, gamma] with n_c = 1; isolate gamma
    cfg = RcacConfig(n_c=1, R_z=1.0, R_u=0.0, R_theta=1.0)
    hist = [(np.zeros(3), np.array([0.0, 0.0, 1.0]), 0.0, 1.0)]
    th = batch_minimizer(hist, cfg)
    assert th[2] == pytest.approx(-0.5)
    assert batch_cost(hist, th, cfg) == pytest.approx(0.5)


def test_batch_cost_prior_only():
    cfg = RcacConfig(n_c=1, theta_0=(0.1, -0.2, 0.3))
    assert batch_cost([], cfg.theta0_array(), cfg) == 0.0


def test_forgetting_weights():
    cfg = RcacConfig(n_c=1, R_u=0.0, lam=0.5, R_theta=1.0)
    sample = (np.zeros(3), np.array([1.0, 0.0, 0.0]), 0.0, 1.0)
    th = np.zeros(3)
    one = batch_cost([sample], th, cfg) - 0.5 * cfg.R_theta * 0
    two = batch_cost([sample, sample], th, cfg)
    # zhat = 1 for both; newest has weight 1, older 0.5
    assert one == pytest.approx(1.0)
    assert two == pytest.approx(1.5)


def test_filter_signal():
    assert filter_signal(FirFilter.unit_delay(), [7.0, 3.0]) == 7.0
    assert filter_signal(FirFilter((1, 2), (1.0, -0.5)), [0.0, 0.0]) == 0.0
    assert filter_signal(FirFilter((1, 2), (1.0, -0.5)), [2.0, 4.0]) == 0.0
    with pytest.raises(ValueError):
        filter_signal(FirFilter((3,), (1.0,)), [1.0, 2.0])


def test_nonfinite_z():
    cfg = RcacConfig(n_c=1)
    with pytest.raises(RcacError, match="z_k"):
        rcac_update(RcacState.initial(cfg), cfg, math.nan, FirFilter.unit_delay())


@pytest.mark.parametrize("kw", [dict(n_c=0), dict(R_u=-1), dict(R_theta=0), dict(lam=0),
                                dict(lam=1.5), dict(n_c=1, theta_0=(0.0,))])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        RcacConfig(**kw)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.floats(0.9, 1.0), st.floats(0.0, 1.0), st.integers(0, 2**32 - 1))
def test_recursive_equals_batch(n_c, lam, r_u, seed):
    rng = np.random.default_rng(seed)
    cfg = RcacConfig(n_c=n_c, R_u=r_u, R_theta=2.0, lam=lam)
    filt = FirFilter((1, 2), tuple(rng.normal(size=2)))
    s = RcacState.initial(cfg)
    hist = []
    for _ in range(20):
        rcac_update(s, cfg, rng.normal(), filt)
        hist.append((s.last_phi, s.last_phi_f, s.last_u_f, float(s.z_hist[0])))
        ref = batch_minimizer(hist, cfg)
        assert np.linalg.norm(s.theta - ref) <= 1e-8 * max(np.linalg.norm(ref), 1e-12)
        assert np.array_equal(s.P, s.P.T)
        assert np.linalg.eigvalsh(s.P).min() > 0


def test_prior_dominance_keeps_gains_small():
    rng = np.random.default_rng(5)
    zs = rng.normal(size=40)

    def run(r_theta):
        cfg = RcacConfig(n_c=2, R_theta=r_theta)
        s = RcacState.initial(cfg)
        for z in zs:
            rcac_update(s, cfg, z, FirFilter((1, 2), (1.0, -1.1)))
        return np.linalg.norm(s.theta)

    assert run(1e8) < 1e-3 * run(1.0)
