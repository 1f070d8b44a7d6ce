"""Open-loop and closed-loop reference models.

The closed-loop model adds output-error feedback, pulling the model
toward the plant::

    x_mo' = Am x_mo + Bm u_m - Lv (Cm x_mo - y_p)

With ``lv=None`` the model is the ordinary open-loop one.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .lti import EPS_STAB, DimensionError, eig, is_hurwitz


class NotConfiguredError(ValueError):
    pass


def _mat(a, rows=None, cols=None) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(a, dtype=float))
    if rows is not None and cols is not None and arr.shape != (rows, cols):
        if arr.size == rows * cols:
            arr = arr.reshape(rows, cols)
        else:
            raise DimensionError(f"expected shape {(rows, cols)}, got {arr.shape}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RefModelConfig:
    am: np.ndarray
    bm: np.ndarray
    cm: np.ndarray
    lv: np.ndarray | None = None

    def __post_init__(self):
        am = _mat(self.am)
        n = am.shape[0]
        if am.shape != (n, n):
            raise DimensionError(f"Am must be square, got {am.shape}")
        bm = np.asarray(self.bm, dtype=float)
        bm = _mat(bm, n, bm.size // n if bm.ndim < 2 else bm.shape[1])
        cm = np.asarray(self.cm, dtype=float)
        cm = _mat(cm, cm.size // n if cm.ndim < 2 else cm.shape[0], n)
        object.__setattr__(self, "am", am)
        object.__setattr__(self, "bm", bm)
        object.__setattr__(self, "cm", cm)
        if self.lv is not None:
            object.__setattr__(self, "lv", _mat(self.lv, n, cm.shape[0]))
        if not is_hurwitz(eig(am), EPS_STAB):
            raise ValueError("reference model Am is not Hurwitz")

    @property
    def n(self) -> int:
        return self.am.shape[0]

    @property
    def m_in(self) -> int:
        return self.bm.shape[1]

    @property
    def m_out(self) -> int:
        return self.cm.shape[0]

    @property
    def closed_loop(self) -> bool:
        return self.lv is not None

    def open_loop(self) -> "RefModelConfig":
        return replace(self, lv=None)

    def with_lv(self, lv) -> "RefModelConfig":
        return replace(self, lv=lv)


def _vec(x, n, what) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.size != n:
        raise DimensionError(f"{what} has length {v.size}, expected {n}")
    return v


def ol_derivative(cfg: RefModelConfig, x_m, u_m) -> np.ndarray:
    x_m = _vec(x_m, cfg.n, "x_m")
    u_m = _vec(u_m, cfg.m_in, "u_m")
    return cfg.am @ x_m + cfg.bm @ u_m


def cl_derivative(cfg: RefModelConfig, x_mo, u_m, y_p) -> np.ndarray:
    if cfg.lv is None:
        raise NotConfiguredError("closed-loop gain not configured")
    x_mo = _vec(x_mo, cfg.n, "x_mo")
    y_p = _vec(y_p, cfg.m_out, "y_p")
    return ol_derivative(cfg, x_mo, u_m) - cfg.lv @ (cfg.cm @ x_mo - y_p)


def lv_deviation_bound(lv_norm: float, am_norm: float, v0: float, lambda_min_p1: float) -> float:
    """Worst-case distance between closed- and open-loop model states.

    ``v0`` is the initial value of the error Lyapunov function; its
    parameter-error part has no closed form, so the caller supplies it.
    """
    if am_norm <= 0 or lambda_min_p1 <= 0:
        raise ValueError("am_norm and lambda_min_p1 must be positive")
    if lv_norm < 0 or v0 < 0:
        raise ValueError("lv_norm and v0 must be nonnegative")
    return lv_norm * np.sqrt(1.0 / (2.0 * am_norm)) * np.sqrt(v0 / lambda_min_p1)
