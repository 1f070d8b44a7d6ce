"""Output-error bound calculators for SAC and CL-SAC.

The formulas are evaluated exactly as derived. For SAC the error matrix is
``A_mm = -CpBp Ke``; the closed-loop model adds ``-Cm Lv``. Bounds scale
with ``sqrt(lambda_max(S))`` for ``S = -(A + A')Q^-1 / 2``, so the report
carries the ratio of the two square roots. Whether that ratio is above or
below one depends on sign conventions the derivation leaves implicit, so
the report states it and does not interpret it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lti import DimensionError


@dataclass
class BoundReport:
    a_mm: np.ndarray
    a_mn: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    lambda_max_s1: float
    lambda_max_s2: float
    bound_ratio: float
    applicable: bool

    def as_text(self) -> str:
        def fmt(a):
            return np.array2string(np.asarray(a), precision=9, separator=", ")

        lines = [
            f"a_mm = {fmt(self.a_mm)}",
            f"a_mn = {fmt(self.a_mn)}",
            f"s1 = {fmt(self.s1)}",
            f"s2 = {fmt(self.s2)}",
            f"lambda_max_s1 = {self.lambda_max_s1:.9g}",
            f"lambda_max_s2 = {self.lambda_max_s2:.9g}",
            f"bound_ratio = {self.bound_ratio:.9g}",
            f"status = {'ok' if self.applicable else 'bound inapplicable'}",
        ]
        return "\n".join(lines)


def error_system_matrices(cpbp, ke, cm, lv=None):
    cpbp, ke, cm = (np.atleast_2d(np.asarray(x, dtype=float)) for x in (cpbp, ke, cm))
    if cpbp.shape[1] != ke.shape[0]:
        raise DimensionError(f"CpBp {cpbp.shape} and Ke {ke.shape} do not chain")
    a_mm = -cpbp @ ke
    if a_mm.shape[0] != a_mm.shape[1]:
        raise DimensionError("error system matrix must be square")
    if lv is None:
        return a_mm, a_mm.copy()
    lv = np.atleast_2d(np.asarray(lv, dtype=float))
    if cm.shape[1] != lv.shape[0] or (cm @ lv).shape != a_mm.shape:
        raise DimensionError(f"Cm {cm.shape} and Lv {lv.shape} do not match A_mm {a_mm.shape}")
    return a_mm, a_mm - cm @ lv


def _lambda_max_sym(S: np.ndarray) -> float:
    return float(np.max(np.linalg.eigvalsh((S + S.T) / 2)))


def bound_report(a_mm, a_mn, q=None) -> BoundReport:
    a_mm = np.atleast_2d(np.asarray(a_mm, dtype=float))
    a_mn = np.atleast_2d(np.asarray(a_mn, dtype=float))
    q = np.eye(a_mm.shape[0]) if q is None else np.atleast_2d(np.asarray(q, dtype=float))
    if not np.allclose(q, q.T) or np.any(np.linalg.eigvalsh(q) <= 0):
        raise ValueError("Q must be symmetric positive definite")
    qi = np.linalg.inv(q)
    s1 = -(a_mm + a_mm.T) @ qi / 2
    s2 = -(a_mn + a_mn.T) @ qi / 2
    l1, l2 = _lambda_max_sym(s1), _lambda_max_sym(s2)
    applicable = l1 > 0 and l2 > 0
    ratio = float(np.sqrt(l2 / l1)) if applicable else float("nan")
    return BoundReport(a_mm, a_mn, s1, s2, l1, l2, ratio, applicable)
