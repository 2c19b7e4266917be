"""Online linearization, transmission zeros and the retrospective filter G_f."""
from dataclasses import dataclass
import math

import numpy as np
from scipy.linalg import expm

from ._jit import njit
from .airframe import N_STATE, accel_kernel, airframe_rhs

# linearized state: (mach, gamma, theta, q, delta, delta_dot); altitude frozen
LIN_INDEX = np.array([0, 1, 2, 3, 6, 7])
N_LIN = 6


class DegenerateChannelError(ArithmeticError):
    pass


@dataclass(frozen=True)
class LinearModel:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: float

    def __post_init__(self):
        n = self.A.shape[0]
        if self.A.shape != (n, n) or self.B.shape != (n,) or self.C.shape != (n,):
            raise ValueError("inconsistent LinearModel dimensions")
        if not (np.isfinite(self.A).all() and np.isfinite(self.B).all()
                and np.isfinite(self.C).all() and math.isfinite(self.D)):
            raise ValueError("LinearModel entries must be finite")


@dataclass(frozen=True)
class FirFilter:
    """G_f(q) = sum_j value_j q^-lag_j, all lags >= 1."""
    lags: tuple
    values: tuple

    def __post_init__(self):
        if len(self.lags) != len(self.values):
            raise ValueError("lags/values length mismatch")
        if any(lag < 1 for lag in self.lags):
            raise ValueError("FIR lags must be >= 1 (strictly proper)")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("FIR coefficients must be finite")

    @property
    def order(self):
        return max(self.lags) if self.lags else 0

    @classmethod
    def unit_delay(cls, gain=1.0):
        return cls((1,), (float(gain),))


def _step(x, scale=1.0):
    return scale * max(1e-6, 1e-6 * abs(x))


def jacobian(dynamics_fn, x0, u0, step_scale=1.0):
    """Central-difference (A, B) of ``dynamics_fn(x, u)`` at (x0, u0).

    Steps are ``step_scale * max(1e-6, 1e-6 |x_i|)`` per component.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    u0 = float(u0)
    n = x0.size
    cols = []
    for j in range(n):
        hj = _step(x0[j], step_scale)
        xp = x0.copy()
        xm = x0.copy()
        xp[j] += hj
        xm[j] -= hj
        cols.append((np.atleast_1d(dynamics_fn(xp, u0)) - np.atleast_1d(dynamics_fn(xm, u0)))
                    / (2 * hj))
    hu = _step(u0, step_scale)
    B = (np.atleast_1d(dynamics_fn(x0, u0 + hu))
         - np.atleast_1d(dynamics_fn(x0, u0 - hu))) / (2 * hu)
    A = np.column_stack(cols)
    if not (np.isfinite(A).all() and np.isfinite(B).all()):
        raise ArithmeticError("non-finite perturbation evaluation in jacobian")
    return A, B


def output_row(output_fn, x0, u0):
    """Central-difference gradient (C, D) of the scalar ``output_fn(x, u)``."""
    A, B = jacobian(lambda x, u: np.array([output_fn(x, u)]), x0, u0)
    return A[0], float(B[0])


@njit
def _lin_eval(x6, y_full, thrust, u, p, out8):
    y = y_full.copy()
    for i in range(6):
        y[LIN_INDEX[i]] = x6[i]
    a_z = airframe_rhs(y, thrust, u, p, out8)
    f = np.empty(6)
    for i in range(6):
        f[i] = out8[LIN_INDEX[i]]
    return f, a_z


@njit
def missile_linear_kernel(y_full, thrust, u0, p):
    """(A, B, C) of the u -> z = -a_z channel by central differences."""
    x0 = np.empty(6)
    for i in range(6):
        x0[i] = y_full[LIN_INDEX[i]]
    out8 = np.empty(N_STATE)
    A = np.empty((6, 6))
    C = np.empty(6)
    for j in range(6):
        hj = max(1e-6, 1e-6 * abs(x0[j]))
        xp = x0.copy()
        xm = x0.copy()
        xp[j] += hj
        xm[j] -= hj
        fp, ap = _lin_eval(xp, y_full, thrust, u0, p, out8)
        fm, am = _lin_eval(xm, y_full, thrust, u0, p, out8)
        for i in range(6):
            A[i, j] = (fp[i] - fm[i]) / (2.0 * hj)
        C[j] = -(ap - am) / (2.0 * hj)
    hu = max(1e-6, 1e-6 * abs(u0))
    fp, _ = _lin_eval(x0, y_full, thrust, u0 + hu, p, out8)
    fm, _ = _lin_eval(x0, y_full, thrust, u0 - hu, p, out8)
    B = (fp - fm) / (2.0 * hu)
    return A, B, C


def missile_model(state_vec, thrust, u0, params_array):
    """Linearize missile + actuator about the current state; output z = -a_z."""
    y = np.asarray(state_vec, dtype=np.float64)[:N_STATE].copy()
    A, B, C = missile_linear_kernel(y, float(thrust), float(u0), params_array)
    # a_z has no direct path from the fin command: it enters through two actuator integrations
    return LinearModel(A, B, C, 0.0)


def numerator_coeffs(model):
    """Numerator of C(sI-A)^-1 B + D, descending powers, via Faddeev-LeVerrier."""
    A, B, C = model.A, model.B, model.C
    n = A.shape[0]
    N = np.eye(n)
    num = np.empty(n + 1)
    num[0] = model.D
    for k in range(1, n + 1):
        M = A @ N
        c_k = -np.trace(M) / k
        num[k] = C @ N @ B + model.D * c_k
        N = M + c_k * np.eye(n)
    return num


def transmission_zeros(model, rel_tol=1e-10):
    num = numerator_coeffs(model)
    scale = np.max(np.abs(num))
    if scale == 0.0:
        raise DegenerateChannelError("transfer function numerator is identically zero")
    small = np.abs(num) <= rel_tol * scale
    lead = int(np.argmin(small))
    num = num[lead:]
    n_origin = 0
    while num.size > 1 and abs(num[-1]) <= rel_tol * scale:
        num = num[:-1]
        n_origin += 1
    roots = np.roots(num) if num.size > 1 else np.zeros(0, dtype=complex)
    return np.concatenate([roots.astype(complex), np.zeros(n_origin, dtype=complex)])


def discretize_zoh(model, t_s):
    n = model.A.shape[0]
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = model.A
    aug[:n, n] = model.B
    E = expm(aug * t_s)
    return E[:n, :n], E[:n, n]


def markov_parameters(model, t_s, count=10):
    """Discrete Markov parameters h_1..h_count of the ZOH-discretized model."""
    Ad, Bd = discretize_zoh(model, t_s)
    out = np.empty(count)
    v = Bd.copy()
    for i in range(count):
        out[i] = model.C @ v
        v = Ad @ v
    return out


def nmp_zeros(zeros, include_complex=False, imag_tol=1e-9):
    """Right-half-plane zeros; complex ones only when ``include_complex``."""
    out = []
    for z in np.asarray(zeros, dtype=complex):
        if z.real <= 0.0:
            continue
        if abs(z.imag) <= imag_tol * max(1.0, abs(z)):
            out.append(complex(z.real, 0.0))
        elif include_complex:
            out.append(z)
    return out


def build_gf(zeros, model, t_s, include_complex=False, threshold=1e-12, max_lag=10):
    """G_f = sigma * prod(q - exp(s_i t_s)) / q^(n_z + 1) over the NMP zeros."""
    if not t_s > 0:
        raise ValueError("t_s must be positive")
    h = markov_parameters(model, t_s, max_lag)
    nz = np.flatnonzero(np.abs(h) > threshold)
    if nz.size == 0:
        raise DegenerateChannelError("all Markov parameters below threshold")
    sigma = float(h[nz[0]])
    disc = [np.exp(s * t_s) for s in nmp_zeros(zeros, include_complex)]
    poly = np.real_if_close(np.poly(disc), tol=1e6) if disc else np.array([1.0])
    poly = np.real(poly)
    values = tuple(float(sigma * c) for c in poly)
    return FirFilter(tuple(range(1, len(values) + 1)), values)
