"""Real-coefficient polynomials and SISO/MIMO state-space algebra.

Polynomials store coefficients highest degree first, the same order used
by ``numpy.polyval`` and by the scenario config files. Transfer functions
are kept unreduced: adding two of them never cancels common factors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

EPS_STAB = 1e-9


class DimensionError(ValueError):
    pass


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Polynomial:
    coeffs: np.ndarray

    def __init__(self, coeffs: Iterable[float]):
        c = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if c.ndim != 1:
            raise DimensionError("polynomial coefficients must be a flat sequence")
        if c.size == 0:
            c = np.zeros(1)
        nz = np.flatnonzero(c)
        c = c[nz[0]:] if nz.size else np.zeros(1)
        object.__setattr__(self, "coeffs", _frozen(c))

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0.0

    @property
    def leading(self) -> float:
        return float(self.coeffs[0])

    def __call__(self, s):
        return np.polyval(self.coeffs, s)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        n = max(a.size, b.size)
        return Polynomial(np.pad(a, (n - a.size, 0)) + np.pad(b, (n - b.size, 0)))

    def __mul__(self, other: "Polynomial | float") -> "Polynomial":
        if isinstance(other, Polynomial):
            return Polynomial(np.convolve(self.coeffs, other.coeffs))
        return Polynomial(self.coeffs * float(other))

    __rmul__ = __mul__

    def __neg__(self) -> "Polynomial":
        return Polynomial(-self.coeffs)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self) -> int:
        return hash(self.coeffs.tobytes())

    def monic(self) -> "Polynomial":
        if self.is_zero:
            raise ValueError("zero polynomial has no leading coefficient")
        return Polynomial(self.coeffs / self.coeffs[0])

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        q, r = np.polydiv(self.coeffs, other.coeffs)
        return Polynomial(q), Polynomial(r)

    def tolist(self) -> list[float]:
        return [float(c) for c in self.coeffs]

    def __repr__(self) -> str:
        return f"Polynomial({self.tolist()})"


def companion(p: Polynomial) -> np.ndarray:
    """Frobenius companion matrix whose characteristic polynomial is monic(p)."""
    c = p.monic().coeffs
    n = c.size - 1
    M = np.zeros((n, n))
    M[0, :] = -c[1:]
    if n > 1:
        M[1:, :-1] = np.eye(n - 1)
    return M


def poly_roots(p: Polynomial) -> np.ndarray:
    """All roots of ``p`` with multiplicity, from companion-matrix eigenvalues."""
    if p.is_zero:
        raise ValueError("undefined roots: zero polynomial")
    if p.degree == 0:
        return np.zeros(0, dtype=complex)
    return np.linalg.eigvals(companion(p)).astype(complex)


def eig(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"eig needs a square matrix, got shape {M.shape}")
    return np.linalg.eigvals(M).astype(complex)


def is_hurwitz(roots: Sequence[complex], eps: float = EPS_STAB) -> bool:
    return bool(np.all(np.real(np.asarray(roots)) < -eps))


@dataclass(frozen=True)
class TransferFunction:
    num: Polynomial
    den: Polynomial

    def __init__(self, num, den):
        num = num if isinstance(num, Polynomial) else Polynomial(num)
        den = den if isinstance(den, Polynomial) else Polynomial(den)
        if den.is_zero:
            raise ValueError("transfer function denominator is identically zero")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def relative_degree(self) -> int:
        return relative_degree(self)

    def __call__(self, s):
        return self.num(s) / self.den(s)

    def __add__(self, other: "TransferFunction") -> "TransferFunction":
        return tf_add(self, other)

    def reciprocal(self) -> "TransferFunction":
        if self.num.is_zero:
            raise ZeroDivisionError("reciprocal of a zero transfer function")
        return TransferFunction(self.den, self.num)

    def zeros(self) -> np.ndarray:
        return poly_roots(self.num)

    def poles(self) -> np.ndarray:
        return poly_roots(self.den)

    def __repr__(self) -> str:
        return f"TransferFunction(num={self.num.tolist()}, den={self.den.tolist()})"


def tf_add(a: TransferFunction, b: TransferFunction) -> TransferFunction:
    """Sum over the product denominator, no cancellation."""
    return TransferFunction(a.num * b.den + b.num * a.den, a.den * b.den)


def relative_degree(tf: TransferFunction) -> int:
    return tf.den.degree - tf.num.degree


def is_minimum_phase(tf: TransferFunction, eps: float = EPS_STAB) -> bool:
    if tf.num.is_zero:
        raise ValueError("minimum-phase test needs a nonzero numerator")
    return is_hurwitz(poly_roots(tf.num), eps)


def reduce(tf: TransferFunction, tol: float = 1e-6) -> TransferFunction:
    """Cancel numerator/denominator roots closer than ``tol``. Never applied implicitly."""
    zs = list(poly_roots(tf.num)) if tf.num.degree else []
    ps = list(poly_roots(tf.den))
    kept = []
    for z in zs:
        j = next((i for i, p in enumerate(ps) if abs(p - z) <= tol * max(1.0, abs(z))), None)
        if j is None:
            kept.append(z)
        else:
            ps.pop(j)
    gain = tf.num.leading / tf.den.leading
    num = gain * np.real_if_close(np.poly(kept), tol=1e6) if kept else np.array([gain])
    den = np.real_if_close(np.poly(ps), tol=1e6) if ps else np.array([1.0])
    return TransferFunction(np.real(num), np.real(den))


@dataclass(frozen=True)
class StateSpace:
    """x' = A x + B u, y = C x + D u. ``D`` defaults to zero."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray = field(default=None)

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        A = np.zeros((0, 0)) if A.size == 0 else np.atleast_2d(A)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionError(f"A must be square, got {A.shape}")
        n = A.shape[0]
        B = np.array(self.B, dtype=float)
        if B.ndim < 2:
            B = B.reshape(n, -1) if n else B.reshape(0, max(B.size, 1))
        C = np.array(self.C, dtype=float)
        if C.ndim < 2:
            C = C.reshape(-1, n) if n else C.reshape(max(C.size, 1), 0)
        if B.shape[0] != n:
            raise DimensionError(f"B must have {n} rows, got {B.shape}")
        if C.shape[1] != n:
            raise DimensionError(f"C must have {n} columns, got {C.shape}")
        D = np.zeros((C.shape[0], B.shape[1])) if self.D is None else np.array(self.D, dtype=float)
        D = D.reshape(C.shape[0], B.shape[1])
        for name, arr in (("A", A), ("B", B), ("C", C), ("D", D)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def is_siso(self) -> bool:
        return self.m == 1 and self.p == 1

    def poles(self) -> np.ndarray:
        return eig(self.A)


def ss_to_tf(sys: StateSpace) -> TransferFunction:
    """C (sI - A)^-1 B + D via the Faddeev-LeVerrier recursion.

    The denominator is the monic characteristic polynomial of A.
    """
    if not sys.is_siso:
        raise DimensionError(f"SISO required, got {sys.p}x{sys.m} system")
    A, b, c = sys.A, sys.B[:, 0], sys.C[0, :]
    n = sys.n
    d = float(sys.D[0, 0])
    if n == 0:
        return TransferFunction([d], [1.0])
    # adj(sI - A) = sum_k M_k s^(n-1-k); char poly coefficients a_k alongside
    a = np.zeros(n + 1)
    a[0] = 1.0
    M = np.eye(n)
    num = np.zeros(n)
    for k in range(1, n + 1):
        num[k - 1] = c @ M @ b
        AM = A @ M
        a[k] = -np.trace(AM) / k
        M = AM + a[k] * np.eye(n)
    numpoly = Polynomial(num) + Polynomial(d * a)
    return TransferFunction(numpoly, Polynomial(a))


def split_proper(tf: TransferFunction) -> tuple[float, TransferFunction]:
    """Split a proper tf into direct feedthrough plus a strictly proper remainder."""
    if relative_degree(tf) < 0:
        raise ValueError("improper transfer function: numerator degree exceeds denominator degree")
    if relative_degree(tf) > 0 or tf.num.is_zero:
        return 0.0, tf
    q, r = tf.num.divmod(tf.den)
    return float(q.coeffs[-1]), TransferFunction(r, tf.den)


def tf_to_ss(tf: TransferFunction) -> StateSpace:
    """Controllable canonical realization; biproper inputs carry their feedthrough in D."""
    d0, sp = split_proper(tf)
    den = sp.den.coeffs
    lead = den[0]
    a = den / lead
    n = a.size - 1
    num = np.pad(sp.num.coeffs / lead, (n - sp.num.coeffs.size, 0)) if n else np.zeros(0)
    A = np.zeros((n, n))
    if n:
        A[0, :] = -a[1:]
        A[1:, :-1] = np.eye(n - 1)
    B = np.zeros((n, 1))
    if n:
        B[0, 0] = 1.0
    C = num.reshape(1, n)
    return StateSpace(A, B, C, [[d0]])


def cascade(lateral: StateSpace, actuator: StateSpace) -> StateSpace:
    """Cascade an actuator in front of a plant: u -> actuator -> plant -> y."""
    n1, n2 = lateral.n, actuator.n
    A = np.zeros((n1 + n2, n1 + n2))
    A[:n1, :n1] = lateral.A
    A[:n1, n1:] = lateral.B @ actuator.C
    A[n1:, n1:] = actuator.A
    B = np.vstack([lateral.B @ actuator.D, actuator.B])
    C = np.hstack([lateral.C, lateral.D @ actuator.C])
    D = lateral.D @ actuator.D
    return StateSpace(A, B, C, D)
