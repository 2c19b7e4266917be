"""Retrospective cost adaptive control with a dense ARMA-plus-integrator regressor.

The gain vector minimizes, recursively,

    J(k) = sum_i lam^(k-i) [R_z zhat_i^2 + R_u (phi_i theta)^2]
           + lam^k (theta - theta_0)' R_theta (theta - theta_0),
    zhat_i = z_i + phi_f,i theta - u_f,i

via exponentially weighted RLS with a prior, initialised at P_0 = R_theta^-1.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .linearize import FirFilter


class RcacError(ArithmeticError):
    pass


class CovarianceError(RcacError):
    pass


@dataclass(frozen=True)
class RcacConfig:
    n_c: int = 4
    R_z: float = 1.0
    R_u: float = 0.25427
    R_theta: float = 10 ** 14.398
    lam: float = 1.0
    theta_0: tuple = None

    def __post_init__(self):
        if self.n_c < 1:
            raise ValueError("n_c must be >= 1")
        if self.R_z < 0 or self.R_u < 0:
            raise ValueError("R_z and R_u must be non-negative")
        if not self.R_theta > 0:
            raise ValueError("R_theta must be positive")
        if not 0 < self.lam <= 1:
            raise ValueError("forgetting factor must lie in (0, 1]")
        if self.theta_0 is not None and len(self.theta_0) != self.n_theta:
            raise ValueError(f"theta_0 must have length {self.n_theta}")

    @property
    def n_theta(self):
        return 2 * self.n_c + 1

    def theta0_array(self):
        if self.theta_0 is None:
            return np.zeros(self.n_theta)
        return np.asarray(self.theta_0, dtype=np.float64)


@dataclass
class RcacState:
    theta: np.ndarray
    P: np.ndarray
    u_hist: np.ndarray  # u_hist[j] = u_{k-1-j}
    z_hist: np.ndarray  # z_hist[j] = z_{k-1-j}
    phi_hist: np.ndarray  # phi_hist[j] = phi_{k-1-j}
    gamma: float = 0.0
    k: int = 0
    # quantities used by the most recent update (for logging and batch checks)
    last_phi: np.ndarray = field(default=None, repr=False)
    last_phi_f: np.ndarray = field(default=None, repr=False)
    last_u_f: float = 0.0

    @classmethod
    def initial(cls, cfg, history=16):
        n = cfg.n_theta
        depth = max(history, cfg.n_c)
        return cls(theta=cfg.theta0_array().copy(),
                   P=np.eye(n) / cfg.R_theta,
                   u_hist=np.zeros(depth),
                   z_hist=np.zeros(cfg.n_c),
                   phi_hist=np.zeros((depth, n)))

    @property
    def n_c(self):
        return self.z_hist.size


def build_regressor(state):
    """phi_k = [u_{k-1..k-n_c}, z_{k-1..k-n_c}, gamma_k]."""
    n_c = state.n_c
    return np.concatenate([state.u_hist[:n_c], state.z_hist, [state.gamma]])


def filter_signal(filt, delay_line):
    """sum_j c_j x_{k-lag_j}; ``delay_line[j-1]`` holds x_{k-j} (scalars or rows)."""
    delay_line = np.asarray(delay_line, dtype=np.float64)
    if filt.order > delay_line.shape[0]:
        raise ValueError(f"delay line shorter than filter order {filt.order}")
    out = np.zeros(delay_line.shape[1:])
    for lag, c in zip(filt.lags, filt.values):
        out = out + c * delay_line[lag - 1]
    return out


def _check_covariance(P):
    try:
        np.linalg.cholesky(P)
        return
    except np.linalg.LinAlgError:
        pass
    w = np.linalg.eigvalsh(P)
    if w[0] < -1e-12 * max(abs(w[-1]), np.finfo(float).tiny):
        raise CovarianceError(f"covariance lost positive definiteness (min eig {w[0]:.3e})")


def rls_step(theta, P, Phi, target, weights, lam):
    """One weighted RLS step with forgetting; returns (theta_new, P_new)."""
    # rows scaled by sqrt(weight): no division by (possibly tiny) weights
    sw = np.sqrt(weights)
    Phi_w = sw[:, None] * Phi
    PPhiT = P @ Phi_w.T
    S = lam * np.eye(len(weights)) + Phi_w @ PPhiT
    P_new = (P - PPhiT @ np.linalg.solve(S, PPhiT.T)) / lam
    P_new = 0.5 * (P_new + P_new.T)
    theta_new = theta - P_new @ Phi_w.T @ (Phi_w @ theta - sw * target)
    return theta_new, P_new


def rcac_update(state, cfg, z_k, filt):
    """Advance RCAC by one step with measured performance ``z_k``.

    Updates ``state`` in place and returns ``(u_k, state)``.
    """
    z_k = float(z_k)
    if not math.isfinite(z_k):
        raise RcacError("non-finite performance variable z_k")
    state.gamma += z_k
    phi = build_regressor(state)
    phi_f = filter_signal(filt, state.phi_hist)
    u_f = float(filter_signal(filt, state.u_hist))

    rows, targets, weights = [], [], []
    if cfg.R_z > 0:
        rows.append(phi_f)
        targets.append(u_f - z_k)
        weights.append(cfg.R_z)
    if cfg.R_u > 0:
        rows.append(phi)
        targets.append(0.0)
        weights.append(cfg.R_u)
    if rows:
        theta, P = rls_step(state.theta, state.P, np.array(rows), np.array(targets),
                            np.array(weights), cfg.lam)
    else:
        theta, P = state.theta, state.P / cfg.lam
    if not np.isfinite(theta).all():
        raise RcacError("non-finite adaptive gain vector theta_k")
    if not np.isfinite(P).all():
        raise RcacError("non-finite covariance P_k")
    _check_covariance(P)

    u_k = float(phi @ theta)
    if not math.isfinite(u_k):
        raise RcacError("non-finite adaptive control u_k")

    state.theta = theta
    state.P = P
    state.u_hist = np.roll(state.u_hist, 1)
    state.u_hist[0] = u_k
    state.z_hist = np.roll(state.z_hist, 1)
    state.z_hist[0] = z_k
    state.phi_hist = np.roll(state.phi_hist, 1, axis=0)
    state.phi_hist[0] = phi
    state.k += 1
    state.last_phi = phi
    state.last_phi_f = phi_f
    state.last_u_f = u_f
    return u_k, state


def batch_cost(history, theta_hat, cfg):
    """Evaluate J directly from ``history`` = [(phi_i, phi_f_i, u_f_i, z_i), ...]."""
    theta_hat = np.asarray(theta_hat, dtype=np.float64)
    k = len(history)
    J = 0.0
    for i, (phi, phi_f, u_f, z) in enumerate(history, start=1):
        zhat = z + float(np.dot(phi_f, theta_hat)) - u_f
        u = float(np.dot(phi, theta_hat))
        J += cfg.lam ** (k - i) * (cfg.R_z * zhat * zhat + cfg.R_u * u * u)
    d = theta_hat - cfg.theta0_array()
    return J + cfg.lam ** k * cfg.R_theta * float(d @ d)


def batch_minimizer(history, cfg):
    """Closed-form argmin of ``batch_cost`` from accumulated normal equations."""
    n = cfg.n_theta
    k = len(history)
    H = cfg.lam ** k * cfg.R_theta * np.eye(n)
    b = cfg.lam ** k * cfg.R_theta * cfg.theta0_array()
    for i, (phi, phi_f, u_f, z) in enumerate(history, start=1):
        w = cfg.lam ** (k - i)
        phi = np.asarray(phi, dtype=np.float64)
        phi_f = np.asarray(phi_f, dtype=np.float64)
        H += w * (cfg.R_z * np.outer(phi_f, phi_f) + cfg.R_u * np.outer(phi, phi))
        b += w * cfg.R_z * phi_f * (u_f - z)
    return np.linalg.solve(H, b)
