"""W-ASPR checks and parallel feedforward compensation.

A square plant is W-ASPR (and so stabilizable by positive-definite output
feedback) when it is minimum phase and the spectrum of ``C B`` lies in the
open right half plane. Plants that fail can be fixed by adding a parallel
path ``D(s) = 1 / C(s)``, where ``C(s)`` is any stabilizing feedback
compensator with a proper inverse.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .lti import (
    EPS_STAB,
    DimensionError,
    StateSpace,
    TransferFunction,
    Polynomial,
    eig,
    is_hurwitz,
    is_minimum_phase,
    poly_roots,
    relative_degree,
    split_proper,
    ss_to_tf,
    tf_add,
    tf_to_ss,
)


@dataclass
class WasprVerdict:
    status: str  # "pass", "fail" or "indeterminate"
    reasons: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def check_waspr_sufficient(plant: StateSpace, eps: float = EPS_STAB) -> WasprVerdict:
    """Minimum phase + spectrum of ``C B`` (plus feedthrough) in the open RHP.

    For a biproper SISO plant the relevant high-frequency gain is ``D``
    itself, so the feedthrough is used in place of ``C B`` whenever it is
    nonzero.
    """
    if plant.m != plant.p:
        raise DimensionError(f"W-ASPR check needs a square plant, got {plant.p}x{plant.m}")
    reasons = []
    hf_gain = plant.D if np.any(plant.D) else plant.C @ plant.B
    cb_ok = is_hurwitz(-eig(hf_gain), eps)
    if not cb_ok:
        reasons.append("CB spectrum not in open right half plane")
    if not plant.is_siso:
        reasons.append("transmission zeros of MIMO plants are not computed")
        return WasprVerdict("fail" if not cb_ok else "indeterminate", reasons)
    tf = ss_to_tf(plant)
    if tf.num.is_zero or not is_minimum_phase(tf, eps):
        reasons.append("plant is not minimum phase")
    return WasprVerdict("fail" if reasons else "pass", reasons)


@dataclass(frozen=True)
class WasprCertificate:
    P: np.ndarray
    Q: np.ndarray
    W: np.ndarray
    Ke_tilde: np.ndarray


def _spd(M: np.ndarray, eps: float) -> bool:
    return np.allclose(M, M.T) and bool(np.all(np.linalg.eigvalsh((M + M.T) / 2) > eps))


def verify_waspr_certificate(plant: StateSpace, cert: WasprCertificate, tol: float = 1e-9,
                             eps: float = EPS_STAB) -> bool:
    """Check the Lyapunov and output-matching equations for a candidate certificate."""
    A, B, C = plant.A, plant.B, plant.C
    P, Q = np.atleast_2d(cert.P).astype(float), np.atleast_2d(cert.Q).astype(float)
    W, K = np.atleast_2d(cert.W).astype(float), np.atleast_2d(cert.Ke_tilde).astype(float)
    n, m, p = plant.n, plant.m, plant.p
    if P.shape != (n, n) or Q.shape != (n, n) or W.shape != (m, m) or K.shape != (m, p):
        raise DimensionError("certificate dimensions do not match the plant")
    if not (_spd(P, eps) and _spd(Q, eps)):
        return False
    Acl = A - B @ K @ C
    lyap = P @ Acl + Acl.T @ P + Q
    match = P @ B - C.T @ W.T
    return bool(np.linalg.norm(lyap) <= tol * np.linalg.norm(Q)
                and np.linalg.norm(match) <= tol * np.linalg.norm(P @ B))


@dataclass(frozen=True)
class PfcDesign:
    """Stabilizing compensator ``C_s``, its inverse ``D_s`` and a realization of ``D_s``.

    ``D_realization.D`` holds the direct feedthrough ``d0``.
    """

    C_s: TransferFunction
    D_s: TransferFunction
    D_realization: StateSpace

    @property
    def d0(self) -> float:
        return float(self.D_realization.D[0, 0])


def synthesize_pfc(C_s: TransferFunction) -> PfcDesign:
    if relative_degree(C_s) > 0:
        raise ValueError("compensator inverse improper: deg num(C) < deg den(C)")
    D_s = C_s.reciprocal()
    d0, strict = split_proper(D_s)
    if strict.num.is_zero:
        real = StateSpace(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[d0]])
    else:
        real = tf_to_ss(strict)
        real = StateSpace(real.A, real.B, real.C, [[d0]])
    return PfcDesign(C_s, D_s, real)


@dataclass(frozen=True)
class AugmentedPlant:
    F: TransferFunction
    relative_degree: int
    minimum_phase: bool

    @property
    def waspr(self) -> bool:
        hf = self.F.num.leading / self.F.den.leading
        return self.minimum_phase and self.relative_degree in (0, 1) and hf > 0


def augment_plant(T_s: TransferFunction, D_s: TransferFunction) -> AugmentedPlant:
    F = tf_add(T_s, D_s)
    return AugmentedPlant(F, relative_degree(F), is_minimum_phase(F))


def parallel_realization(plant: StateSpace, pfc: PfcDesign) -> StateSpace:
    """State-space form of ``plant + D(s)`` sharing the input, outputs summed."""
    if not plant.is_siso:
        raise DimensionError("parallel feedforward is only defined for SISO plants here")
    Dr = pfc.D_realization
    n1, n2 = plant.n, Dr.n
    A = np.zeros((n1 + n2, n1 + n2))
    A[:n1, :n1] = plant.A
    A[n1:, n1:] = Dr.A
    B = np.vstack([plant.B, Dr.B])
    C = np.hstack([plant.C, Dr.C])
    return StateSpace(A, B, C, plant.D + Dr.D)


@dataclass
class SweepPoint:
    gain: float
    poles: np.ndarray
    stable: bool


def gain_sweep_stability(F: TransferFunction, gains: Iterable[float],
                         eps: float = EPS_STAB) -> list[SweepPoint]:
    """Closed-loop poles of ``F`` under static negative feedback ``k``: roots of den + k num."""
    out = []
    for k in gains:
        if k <= 0:
            raise ValueError("sweep gains must be positive")
        poles = poly_roots(F.den + Polynomial(F.num.coeffs * k))
        out.append(SweepPoint(float(k), np.sort_complex(poles), is_hurwitz(poles, eps)))
    return out


def default_sweep_gains(k_min: float = 0.1, k_max: float = 1e4, count: int = 50) -> np.ndarray:
    return np.logspace(np.log10(k_min), np.log10(k_max), count)


def write_sweep_csv(path, points: Sequence[SweepPoint]) -> None:
    width = max((p.poles.size for p in points), default=0)
    header = ["gain"]
    for i in range(1, width + 1):
        header += [f"pole_re_{i}", f"pole_im_{i}"]
    header.append("stable")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for pt in points:
            row = [f"{pt.gain:.9g}"]
            for z in pt.poles:
                row += [f"{z.real:.9g}", f"{z.imag:.9g}"]
            row += [""] * (2 * (width - pt.poles.size))
            row.append(int(pt.stable))
            w.writerow(row)
