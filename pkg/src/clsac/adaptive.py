"""Simple adaptive control law with sigma-modification.

The control is ``u_p = K r`` with ``r = [e; x_m; u_m]``. Each gain block is
the sum of a proportional part recomputed from the current signals and an
integral part carried as state by the simulator::

    K_pe = e e' G_pe        K_Ie' = e e' G_Ie - sigma K_Ie
    K_px = e x_m' G_px      K_Ix' = e x_m' G_Ix
    K_pu = e u_m' G_pu      K_Iu' = e u_m' G_Iu

For the closed-loop variant the caller passes ``e_my`` and ``x_mo``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lti import DimensionError

_GAMMA_NAMES = ("gamma_pe", "gamma_ie", "gamma_px", "gamma_ix", "gamma_pu", "gamma_iu")


@dataclass(frozen=True)
class GainWeights:
    gamma_pe: np.ndarray
    gamma_ie: np.ndarray
    gamma_px: np.ndarray
    gamma_ix: np.ndarray
    gamma_pu: np.ndarray
    gamma_iu: np.ndarray
    sigma: float
    leak_all: bool = False

    @classmethod
    def uniform(cls, gamma: float, sigma: float, m: int = 1, n_m: int = 1, m_m: int = 1,
                leak_all: bool = False) -> "GainWeights":
        return cls(gamma * np.eye(m), gamma * np.eye(m), gamma * np.eye(n_m), gamma * np.eye(n_m),
                   gamma * np.eye(m_m), gamma * np.eye(m_m), sigma, leak_all)

    def __post_init__(self):
        for name in _GAMMA_NAMES:
            g = np.atleast_2d(np.asarray(getattr(self, name), dtype=float)).copy()
            if g.shape[0] != g.shape[1]:
                raise DimensionError(f"{name} must be square")
            sym = (g + g.T) / 2
            if not np.all(np.linalg.eigvalsh(sym) > 0):
                raise ValueError(f"{name} must be positive definite")
            g.setflags(write=False)
            object.__setattr__(self, name, g)
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        object.__setattr__(self, "sigma", float(self.sigma))

    def check(self, m: int, n_m: int, m_m: int) -> None:
        want = dict(gamma_pe=m, gamma_ie=m, gamma_px=n_m, gamma_ix=n_m, gamma_pu=m_m, gamma_iu=m_m)
        for name, k in want.items():
            if getattr(self, name).shape != (k, k):
                raise DimensionError(f"{name} must be {k}x{k}")


@dataclass
class AdaptiveGains:
    """Integral gain state. Proportional parts are never stored."""

    k_ie: np.ndarray
    k_ix: np.ndarray
    k_iu: np.ndarray

    def __post_init__(self):
        for name in ("k_ie", "k_ix", "k_iu"):
            setattr(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))

    @classmethod
    def zeros(cls, m: int, n_m: int, m_m: int) -> "AdaptiveGains":
        return cls(np.zeros((m, m)), np.zeros((m, n_m)), np.zeros((m, m_m)))


def _col(v) -> np.ndarray:
    return np.asarray(v, dtype=float).reshape(-1, 1)


def proportional_gains(e, x_m, u_m, w: GainWeights):
    e, x_m, u_m = _col(e), _col(x_m), _col(u_m)
    return e @ e.T @ w.gamma_pe, e @ x_m.T @ w.gamma_px, e @ u_m.T @ w.gamma_pu


def integral_gain_derivatives(e, x_m, u_m, gains: AdaptiveGains, w: GainWeights):
    e, x_m, u_m = _col(e), _col(x_m), _col(u_m)
    d_ie = e @ e.T @ w.gamma_ie - w.sigma * gains.k_ie
    d_ix = e @ x_m.T @ w.gamma_ix
    d_iu = e @ u_m.T @ w.gamma_iu
    if w.leak_all:
        d_ix = d_ix - w.sigma * gains.k_ix
        d_iu = d_iu - w.sigma * gains.k_iu
    return d_ie, d_ix, d_iu


def control(e, x_m, u_m, gains: AdaptiveGains, w: GainWeights) -> np.ndarray:
    k_pe, k_px, k_pu = proportional_gains(e, x_m, u_m, w)
    e, x_m, u_m = _col(e), _col(x_m), _col(u_m)
    u = (k_pe + gains.k_ie) @ e + (k_px + gains.k_ix) @ x_m + (k_pu + gains.k_iu) @ u_m
    return u.reshape(-1)
