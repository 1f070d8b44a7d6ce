"""Command generator tracker: ideal trajectories for step commands.

For a constant command the ideal plant state and control are linear in the
model state and command::

    x_p* = S11 x_m + S12 u_m,     u_p* = S21 x_m + S22 u_m

and perfect output following requires

    Ap S11 + Bp S21 = S11 Am_eff     Ap S12 + Bp S22 = S11 Bm_eff
    Cp S11 = Cm                      Cp S12 = 0

where for a closed-loop model ``Am_eff = Am - Lv Cm + Lv Cp S11`` and
``Bm_eff = Bm + Lv Cp S12``. The closed-loop system is quadratic in S11;
it is solved by lagging one S11 factor and iterating linear solves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lti import DimensionError, StateSpace
from .refmodel import RefModelConfig


class CgtError(RuntimeError):
    def __init__(self, message: str, residual: float | None = None, cond: float | None = None):
        super().__init__(message)
        self.residual = residual
        self.cond = cond


@dataclass
class IdealGains:
    s11: np.ndarray
    s12: np.ndarray
    s21: np.ndarray
    s22: np.ndarray
    residual: float = float("nan")
    iterations: int = 0

    def norm(self) -> float:
        return float(max(np.linalg.norm(b) for b in (self.s11, self.s12, self.s21, self.s22)))


def _dims(plant: StateSpace, ref: RefModelConfig):
    n_p, m = plant.n, plant.m
    if plant.p != m:
        raise DimensionError("CGT needs a square plant")
    if ref.m_out != m:
        raise DimensionError(f"reference output dimension {ref.m_out} != plant output dimension {m}")
    return n_p, m, ref.n, ref.m_in


def cgt_blocks(plant: StateSpace, ref: RefModelConfig, S: IdealGains) -> list[np.ndarray]:
    """Left-minus-right of the four model-following equations."""
    Ap, Bp, Cp = plant.A, plant.B, plant.C
    Am, Bm, Cm = ref.am, ref.bm, ref.cm
    am_eff, bm_eff = Am, Bm
    if ref.lv is not None:
        am_eff = Am - ref.lv @ Cm + ref.lv @ Cp @ S.s11
        bm_eff = Bm + ref.lv @ Cp @ S.s12
    return [
        Ap @ S.s11 + Bp @ S.s21 - S.s11 @ am_eff,
        Ap @ S.s12 + Bp @ S.s22 - S.s11 @ bm_eff,
        Cp @ S.s11 - Cm,
        Cp @ S.s12,
    ]


def cgt_residual(plant: StateSpace, ref: RefModelConfig, S: IdealGains) -> float:
    _dims(plant, ref)
    return float(max(np.linalg.norm(b) for b in cgt_blocks(plant, ref, S)))


def _assemble(plant: StateSpace, ref: RefModelConfig, s11_lag: np.ndarray | None):
    # unknowns are column-major vecs of S11, S12, S21, S22; vec(A X B) = (B' kron A) vec(X)
    n_p, m, n_m, m_m = _dims(plant, ref)
    Ap, Bp, Cp = plant.A, plant.B, plant.C
    Am, Bm, Cm = ref.am, ref.bm, ref.cm
    I_p, I_nm, I_mm = np.eye(n_p), np.eye(n_m), np.eye(m_m)
    sizes = [n_p * n_m, n_p * m_m, m * n_m, m * m_m]
    offs = np.concatenate([[0], np.cumsum(sizes)])
    N = offs[-1]
    M = np.zeros((N, N))
    rhs = np.zeros(N)
    r1, r2, r3 = n_p * n_m, n_p * m_m, m * n_m
    rows = np.concatenate([[0], np.cumsum([r1, r2, r3, m * m_m])])
    lag = None if (ref.lv is None or s11_lag is None) else s11_lag @ ref.lv @ Cp

    def put(r, c, blk):
        M[rows[r]:rows[r + 1], offs[c]:offs[c + 1]] += blk

    # block 1: Ap S11 + Bp S21 - S11 Am [- L S11] = [-S11lag Lv Cm]
    put(0, 0, np.kron(I_nm, Ap) - np.kron(Am.T, I_p))
    put(0, 2, np.kron(I_nm, Bp))
    # block 2: Ap S12 + Bp S22 - S11 Bm [- L S12] = 0
    put(1, 1, np.kron(I_mm, Ap))
    put(1, 3, np.kron(I_mm, Bp))
    put(1, 0, -np.kron(Bm.T, I_p))
    if lag is not None:
        put(0, 0, -np.kron(I_nm, lag))
        put(1, 1, -np.kron(I_mm, lag))
        rhs[rows[0]:rows[1]] = (-(s11_lag @ ref.lv @ Cm)).reshape(-1, order="F")
    # block 3: Cp S11 = Cm ; block 4: Cp S12 = 0
    put(2, 0, np.kron(I_nm, Cp))
    rhs[rows[2]:rows[3]] = Cm.reshape(-1, order="F")
    put(3, 1, np.kron(I_mm, Cp))
    return M, rhs, offs, (n_p, m, n_m, m_m)


def _unpack(x, offs, dims) -> IdealGains:
    n_p, m, n_m, m_m = dims
    return IdealGains(
        x[offs[0]:offs[1]].reshape((n_p, n_m), order="F"),
        x[offs[1]:offs[2]].reshape((n_p, m_m), order="F"),
        x[offs[2]:offs[3]].reshape((m, n_m), order="F"),
        x[offs[3]:offs[4]].reshape((m, m_m), order="F"),
    )


def _solve(M, rhs):
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e14:
        raise CgtError(f"CGT solution does not exist (condition number {cond:.3e})", cond=cond)
    return np.linalg.solve(M, rhs), cond


def solve_cgt_openloop(plant: StateSpace, ref: RefModelConfig, tol: float = 1e-8) -> IdealGains:
    ol = ref.open_loop()
    M, rhs, offs, dims = _assemble(plant, ol, None)
    x, cond = _solve(M, rhs)
    S = _unpack(x, offs, dims)
    S.residual = cgt_residual(plant, ol, S)
    if S.residual > tol * (1 + S.norm()):
        raise CgtError(f"CGT solve inaccurate: residual {S.residual:.3e} (cond {cond:.3e})",
                       residual=S.residual, cond=cond)
    return S


def solve_cgt_closedloop(plant: StateSpace, ref: RefModelConfig, init: IdealGains | None = None,
                         tol: float = 1e-8, max_iter: int = 200) -> IdealGains:
    """Fixed-point iteration on the quadratic closed-loop equations, seeded by ``init``."""
    S = init if init is not None else solve_cgt_openloop(plant, ref)
    res = cgt_residual(plant, ref, S)
    best, best_res = S, res
    it = 0
    while res > tol * (1 + S.norm()) and it < max_iter:
        it += 1
        M, rhs, offs, dims = _assemble(plant, ref, S.s11)
        x, _ = _solve(M, rhs)
        S = _unpack(x, offs, dims)
        res = cgt_residual(plant, ref, S)
        if res < best_res:
            best, best_res = S, res
    if best_res > tol * (1 + best.norm()):
        raise CgtError(f"closed-loop CGT did not converge in {max_iter} iterations "
                       f"(best residual {best_res:.3e})", residual=best_res)
    return IdealGains(best.s11, best.s12, best.s21, best.s22, best_res, it)
