"""Dormand-Prince 5(4) integration over one zero-order-hold interval."""
from dataclasses import dataclass

import numpy as np

from ._jit import is_jitted, njit, python_impl

# Butcher tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# 5th minus embedded 4th order weights
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                          22 / 525, -1 / 40)

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_NONFINITE = 2


class IntegrationError(RuntimeError):
    pass


class StiffnessError(IntegrationError):
    """Step size fell below ``min_step``."""


class NonFiniteError(IntegrationError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-9
    min_step: float = 1e-12
    max_step: float = 0.05

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.min_step <= self.max_step:
            raise ValueError("need 0 < min_step <= max_step")


@njit(cache=False)
def dopri_kernel(f, t0, t1, y0, p, rtol, atol, hmin, hmax, h_init):
    """Adaptive DP45 from t0 to t1. Returns (y1, next_step, status, n_steps)."""
    t = t0
    y = y0.copy()
    h = min(h_init, hmax, t1 - t0)
    k1 = f(t, y, p)
    n = 0
    if not np.isfinite(k1).all():
        return y, h, STATUS_NONFINITE, n
    h_last = h
    while t < t1:
        remaining = t1 - t
        last = h >= remaining
        if last:
            h = remaining
        k2 = f(t + C2 * h, y + h * (A21 * k1), p)
        k3 = f(t + C3 * h, y + h * (A31 * k1 + A32 * k2), p)
        k4 = f(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3), p)
        k5 = f(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4), p)
        k6 = f(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5), p)
        y5 = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = f(t + h, y5, p)
        err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        if not (np.isfinite(y5).all() and np.isfinite(k7).all()):
            if h <= hmin:
                return y, h, STATUS_NONFINITE, n
            h = 0.25 * h
            continue
        en = 0.0
        for i in range(y.shape[0]):
            sc = atol + rtol * max(abs(y[i]), abs(y5[i]))
            r = abs(err[i]) / sc
            if r > en:
                en = r
        if en <= 1.0:
            t = t1 if last else t + h
            y = y5
            k1 = k7
            n += 1
            h_last = h
            fac = 5.0 if en == 0.0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
            h = min(hmax, h * fac)
        else:
            h = h * max(0.2, 0.9 * en ** -0.2)
            if h < hmin:
                return y, h, STATUS_UNDERFLOW, n
    # carry the pre-clipping step size into the next interval
    return y, max(h, h_last), STATUS_OK, n


@njit(cache=False)
def dopri_fixed(f, t0, t1, y0, p, n_steps):
    """Fixed-step DP45 propagating the 5th-order solution."""
    h = (t1 - t0) / n_steps
    y = y0.copy()
    t = t0
    for i in range(n_steps):
        k1 = f(t, y, p)
        k2 = f(t + C2 * h, y + h * (A21 * k1), p)
        k3 = f(t + C3 * h, y + h * (A31 * k1 + A32 * k2), p)
        k4 = f(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3), p)
        k5 = f(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4), p)
        k6 = f(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5), p)
        y = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        t = t0 + (i + 1) * h
    return y


def _raise_for(status, t0, t1):
    if status == STATUS_UNDERFLOW:
        raise StiffnessError(f"step size underflow integrating [{t0}, {t1}]")
    if status == STATUS_NONFINITE:
        raise NonFiniteError(f"non-finite derivative integrating [{t0}, {t1}]")


def _resolve(derivative_fn, params):
    """Pick kernel flavour: compiled when both the kernel and the RHS are jitted."""
    if params is None:
        def rhs(t, y, _p):
            return np.asarray(derivative_fn(t, y), dtype=np.float64)
        return python_impl(dopri_kernel), python_impl(dopri_fixed), rhs, np.zeros(0)
    p = np.asarray(params, dtype=np.float64)
    if is_jitted(derivative_fn) and is_jitted(dopri_kernel):
        return dopri_kernel, dopri_fixed, derivative_fn, p
    return (python_impl(dopri_kernel), python_impl(dopri_fixed),
            python_impl(derivative_fn), p)


def advance(derivative_fn, state, t0, t1, cfg=None, params=None, h0=None):
    """Integrate and also return the suggested next step size."""
    cfg = cfg or IntegratorConfig()
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    kernel, _, rhs, p = _resolve(derivative_fn, params)
    y0 = np.array(state, dtype=np.float64)
    h = cfg.max_step if h0 is None else h0
    y, h_next, status, _ = kernel(rhs, float(t0), float(t1), y0, p, cfg.rel_tol,
                                  cfg.abs_tol, cfg.min_step, cfg.max_step, h)
    _raise_for(status, t0, t1)
    return y, h_next


def integrate_interval(derivative_fn, state, t0, t1, cfg=None, params=None):
    """State at ``t1`` starting from ``state`` at ``t0``.

    ``derivative_fn`` is ``f(t, y)`` when ``params`` is None, otherwise the
    kernel signature ``f(t, y, params)``. Exogenous inputs are whatever
    ``params`` holds, constant over the interval.
    """
    y, _ = advance(derivative_fn, state, t0, t1, cfg, params)
    return y


def integrate_fixed(derivative_fn, state, t0, t1, n_steps, params=None):
    """Fixed-step DP45 (tolerance control disabled); used for order checks."""
    _, fixed, rhs, p = _resolve(derivative_fn, params)
    return fixed(rhs, float(t0), float(t1), np.array(state, dtype=np.float64), p,
                 int(n_steps))
