import pytest
from hypothesis import given, strategies as st

from tla_rcac.autopilot import TlaGains, TlaState, scale_gains, tla_integrand, tla_output

G = TlaGains()
sig = st.floats(-100, 100)


def test_integrand_examples():
    assert tla_integrand(G, 0, 0, 0) == 0
    assert tla_integrand(G, 0, 0, 1) == pytest.approx(0.2446459)
    assert tla_integrand(G, 1, 1, 0) == pytest.approx(15.39776, abs=5e-6)


def test_output_examples():
    assert tla_output(G, TlaState(0.0), 0.0) == 0
    assert tla_output(G, TlaState(0.0), 0.1) == pytest.approx(0.0464)
    assert tla_output(G, TlaState(0.2), 0.0) == 0.2


def test_scale_examples():
    assert scale_gains(G, 1.0) == G
    s = scale_gains(G, 0.2)
    assert s.as_tuple() == pytest.approx((0.0928, 3.124948, 0.04892918, 0.18556))
    assert scale_gains(G, 0.0).as_tuple() == (0, 0, 0, 0)


def test_scale_mask():
    s = scale_gains(G, 0.5, mask=("K_q",))
    assert (s.K_q, s.K_az) == (0.232, G.K_az)
    with pytest.raises(ValueError):
        scale_gains(G, 0.5, mask=("K_x",))


@given(sig, sig, sig, sig, sig, sig)
def test_integrand_superposition(q1, a1, r1, q2, a2, r2):
    lhs = tla_integrand(G, q1 + q2, a1 + a2, r1 + r2)
    rhs = tla_integrand(G, q1, a1, r1) + tla_integrand(G, q2, a2, r2)
    assert lhs == pytest.approx(rhs, abs=1e-9)


@given(sig, sig, st.floats(0, 2))
def test_scaled_output(q, integ, alpha):
    out = tla_output(scale_gains(G, alpha), TlaState(integ), q)
    assert out == pytest.approx(alpha * G.K_q * q + integ, abs=1e-9)
