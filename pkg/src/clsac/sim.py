"""Fixed-step simulation of SAC and CL-SAC closed loops.

The whole loop (plant, parallel feedforward state, reference model, an
open-loop shadow of the reference model, and the integral gains) is one
state vector advanced by classical RK4. Signal wiring per evaluation::

    y_aug = Cp x_p + Cd x_pfc + d0 u_hold
    e     = Cm x_m - y_aug            (x_m is x_mo for CL-SAC)
    u_p   = control(e, x_m, u_m, gains)

``u_hold`` is the control from the previous step. It only matters when the
compensator has direct feedthrough (``d0 != 0``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .adaptive import GainWeights
from .cgt import IdealGains
from .kernel import get_kernel
from .lti import DimensionError, StateSpace, cascade
from .passivity import PfcDesign
from .refmodel import NotConfiguredError, RefModelConfig


class DivergenceError(RuntimeError):
    def __init__(self, t: float):
        super().__init__(f"numerical divergence at t={t:.6g}")
        self.t = t


CONTROLLERS = ("sac", "clsac")


@dataclass(frozen=True)
class CommandSpec:
    kind: str = "square"  # step | square | constant
    amplitude: float | tuple = 0.1745
    period: float = 20.0
    offset: float | tuple = 0.0

    def __post_init__(self):
        if self.kind not in ("step", "square", "constant"):
            raise ValueError(f"unknown command kind {self.kind!r}")
        if self.kind == "square" and not self.period > 0:
            raise ValueError("square command needs a positive period")


def command_value(spec: CommandSpec, t: float) -> np.ndarray:
    amp = np.atleast_1d(np.asarray(spec.amplitude, dtype=float))
    off = np.atleast_1d(np.asarray(spec.offset, dtype=float))
    if spec.kind == "square" and math.fmod(t, spec.period) >= 0.5 * spec.period:
        return -amp + off
    return amp + off


@dataclass(frozen=True)
class SimSettings:
    dt: float = 1e-3
    t_final: float = 40.0
    decimate: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_final < self.dt:
            raise ValueError("t_final must be at least dt")
        if self.decimate < 1:
            raise ValueError("decimate must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_final / self.dt + 1e-9))


@dataclass(frozen=True)
class InitialState:
    plant: Sequence[float] | None = None
    pfc: Sequence[float] | None = None
    ref: Sequence[float] | None = None
    k_ie: Sequence | None = None
    k_ix: Sequence | None = None
    k_iu: Sequence | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    plant: StateSpace
    ref: RefModelConfig
    weights: GainWeights
    command: CommandSpec = CommandSpec()
    sim: SimSettings = SimSettings()
    pfc: PfcDesign | None = None
    actuator: StateSpace | None = None
    initial: InitialState = InitialState()
    state_names: tuple | None = None

    def __post_init__(self):
        P = self.augmented_plant
        if P.m != P.p:
            raise DimensionError("plant must be square")
        if self.ref.m_out != P.p:
            raise DimensionError("reference model output dimension differs from plant output")
        self.weights.check(P.m, self.ref.n, self.ref.m_in)
        if self.pfc is not None and not P.is_siso:
            raise DimensionError("parallel feedforward needs a SISO plant")
        amp = np.atleast_1d(np.asarray(self.command.amplitude, dtype=float))
        if amp.size not in (1, self.ref.m_in):
            raise DimensionError("command amplitude does not match reference input dimension")
        if self.state_names is not None and len(self.state_names) != P.n:
            raise DimensionError("state_names must name every plant state")

    @property
    def augmented_plant(self) -> StateSpace:
        return self.plant if self.actuator is None else cascade(self.plant, self.actuator)

    def with_lv(self, lv) -> "Scenario":
        return replace(self, ref=self.ref.with_lv(lv))

    def with_command(self, **kw) -> "Scenario":
        return replace(self, command=replace(self.command, **kw))

    def with_sim(self, **kw) -> "Scenario":
        return replace(self, sim=replace(self.sim, **kw))


@dataclass
class SimTrace:
    controller: str
    dt: float
    t: np.ndarray
    u_m: np.ndarray
    y_m_ol: np.ndarray
    y_mo: np.ndarray      # output of the model inside the adaptive loop (y_m for SAC)
    y_p: np.ndarray
    y_aug: np.ndarray
    e: np.ndarray
    u_p: np.ndarray
    x_p: np.ndarray
    x_pfc: np.ndarray
    x_m: np.ndarray
    x_m_ol: np.ndarray
    k_pe: np.ndarray
    k_ie: np.ndarray
    k_px: np.ndarray
    k_ix: np.ndarray
    k_pu: np.ndarray
    k_iu: np.ndarray
    state_names: tuple = field(default=())

    def __len__(self) -> int:
        return self.t.size


def rk4_step(f: Callable, state, t: float, dt: float) -> np.ndarray:
    if not dt > 0:
        raise ValueError("dt must be positive")
    x = np.asarray(state, dtype=float)
    # overflow surfaces as a non-finite state below
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = f(t, x)
        k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1)
        k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2)
        k4 = f(t + dt, x + dt * k3)
        out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise DivergenceError(t + dt)
    return out


def _initial_vector(sc: Scenario, P: StateSpace, n_d: int) -> np.ndarray:
    m, n_m, m_m = P.m, sc.ref.n, sc.ref.m_in
    ini = sc.initial

    def part(v, shape):
        if v is None:
            return np.zeros(int(np.prod(shape)))
        a = np.asarray(v, dtype=float)
        if a.size != int(np.prod(shape)):
            raise DimensionError(f"initial state block has {a.size} entries, expected {shape}")
        return a.reshape(-1)

    x_ref = part(ini.ref, (n_m,))
    return np.concatenate([
        part(ini.plant, (P.n,)), part(ini.pfc, (n_d,)), x_ref, x_ref,
        part(ini.k_ie, (m, m)), part(ini.k_ix, (m, n_m)), part(ini.k_iu, (m, m_m)),
    ])


def run(sc: Scenario, controller: str = "clsac", backend: str | None = None) -> SimTrace:
    if controller not in CONTROLLERS:
        raise ValueError(f"controller must be one of {CONTROLLERS}")
    ref = sc.ref
    if controller == "clsac":
        if ref.lv is None:
            raise NotConfiguredError("closed-loop gain not configured")
    else:
        ref = ref.open_loop()
    P = sc.augmented_plant
    m, n_m, m_m = P.m, ref.n, ref.m_in
    if sc.pfc is not None:
        Dr = sc.pfc.D_realization
        ad, bd, cd, d0 = Dr.A, Dr.B, Dr.C, Dr.D
    else:
        ad, bd, cd, d0 = np.zeros((0, 0)), np.zeros((0, m)), np.zeros((m, 0)), np.zeros((m, m))
    n_d = ad.shape[0]
    lv = ref.lv if ref.lv is not None else np.zeros((n_m, m))
    w = sc.weights
    cmd = sc.command
    kind = 1 if cmd.kind == "square" else 0
    amp = np.broadcast_to(np.atleast_1d(np.asarray(cmd.amplitude, dtype=float)), (m_m,)).copy()
    off = np.broadcast_to(np.atleast_1d(np.asarray(cmd.offset, dtype=float)), (m_m,)).copy()
    x0 = _initial_vector(sc, P, n_d)
    dt, N = sc.sim.dt, sc.sim.n_steps

    kern = get_kernel(backend)
    states, u_rec, hold, fail = kern(
        P.A, P.B, P.C, ad, bd, cd, d0, ref.am, ref.bm, ref.cm, lv, ref.lv is not None,
        w.gamma_pe, w.gamma_ie, w.gamma_px, w.gamma_ix, w.gamma_pu, w.gamma_iu, w.sigma, w.leak_all,
        kind, amp, off, float(cmd.period), x0, dt, N)
    if fail >= 0:
        raise DivergenceError(fail * dt)

    return _trace_from_states(sc, controller, P, ref, states, u_rec, hold, n_d)


def _trace_from_states(sc, controller, P, ref, states, u_rec, hold, n_d) -> SimTrace:
    m, n_m, m_m = P.m, ref.n, ref.m_in
    dt = sc.sim.dt
    K = states.shape[0]
    t = np.arange(K) * dt
    i_d = P.n
    i_m = i_d + n_d
    i_ol = i_m + n_m
    i_ie = i_ol + n_m
    i_ix = i_ie + m * m
    i_iu = i_ix + m * n_m
    x_p, x_d = states[:, :i_d], states[:, i_d:i_m]
    x_m, x_ol = states[:, i_m:i_ol], states[:, i_ol:i_ie]
    k_ie = states[:, i_ie:i_ix].reshape(K, m, m)
    k_ix = states[:, i_ix:i_iu].reshape(K, m, n_m)
    k_iu = states[:, i_iu:].reshape(K, m, m_m)
    u_m = np.array([command_value(sc.command, tk) for tk in t]).reshape(K, -1)
    u_m = np.broadcast_to(u_m, (K, m_m)).copy()
    y_p = x_p @ P.C.T
    if sc.pfc is not None:
        Dr = sc.pfc.D_realization
        y_aug = y_p + x_d @ Dr.C.T + hold @ Dr.D.T
    else:
        y_aug = y_p.copy()
    y_mo = x_m @ ref.cm.T
    y_m_ol = x_ol @ ref.cm.T
    e = y_mo - y_aug
    # proportional gains: K_pe = e e' G etc.
    w = sc.weights
    k_pe = np.einsum("ki,kj->kij", e, e @ w.gamma_pe)
    k_px = np.einsum("ki,kj->kij", e, x_m @ w.gamma_px)
    k_pu = np.einsum("ki,kj->kij", e, u_m @ w.gamma_pu)
    names = tuple(sc.state_names) if sc.state_names else tuple(f"x{i + 1}" for i in range(P.n))
    return SimTrace(controller, dt, t, u_m, y_m_ol, y_mo, y_p, y_aug, e, u_rec, x_p, x_d, x_m, x_ol,
                    k_pe, k_ie, k_px, k_ix, k_pu, k_iu, names)


@dataclass
class Metrics:
    rms_tracking_error: float
    rms_model_error: float
    rms_model_deviation: float
    control_energy: float
    control_total_variation: float
    peak_u: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _rms(x: np.ndarray) -> float:
    x = np.asarray(x).reshape(len(x), -1)
    return float(np.sqrt(np.mean(np.sum(x * x, axis=1))))


def metrics(trace: SimTrace) -> Metrics:
    """Scalar summaries. Tracking error is measured against the open-loop model output."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    u = trace.u_p.reshape(len(trace), -1)
    return Metrics(
        rms_tracking_error=_rms(trace.y_p - trace.y_m_ol),
        rms_model_error=_rms(trace.e),
        rms_model_deviation=_rms(trace.y_mo - trace.y_m_ol),
        control_energy=float(np.sum(u * u) * trace.dt),
        control_total_variation=float(np.sum(np.abs(np.diff(u, axis=0)))),
        peak_u=float(np.max(np.abs(u))),
    )


def simulate_ideal_tracking(plant: StateSpace, ref: RefModelConfig, S: IdealGains, amplitude,
                            dt: float = 1e-3, t_final: float = 20.0):
    """Drive the plant with the ideal control ``S21 x_m + S22 u_m`` for a step command.

    Starts on the ideal manifold ``x_p(0) = S11 x_m(0) + S12 u_m`` with
    ``x_m(0) = 0``. Returns ``(t, y_p, y_m)``.
    """
    ref = ref.open_loop() if ref.lv is None else ref
    u_m = np.broadcast_to(np.atleast_1d(np.asarray(amplitude, dtype=float)), (ref.m_in,))
    n_p, n_m = plant.n, ref.n
    x_m0 = np.zeros(n_m)
    x_p0 = S.s11 @ x_m0 + S.s12 @ u_m
    Ap, Bp = plant.A, plant.B

    def f(t, z):
        xp, xm = z[:n_p], z[n_p:]
        u = S.s21 @ xm + S.s22 @ u_m
        y_p = plant.C @ xp
        dxm = ref.am @ xm + ref.bm @ u_m
        if ref.lv is not None:
            dxm = dxm - ref.lv @ (ref.cm @ xm - y_p)
        return np.concatenate([Ap @ xp + Bp @ u, dxm])

    N = int(math.floor(t_final / dt + 1e-9))
    z = np.concatenate([x_p0, x_m0])
    ts = np.arange(N + 1) * dt
    yp = np.empty((N + 1, plant.p))
    ym = np.empty((N + 1, ref.m_out))
    for k in range(N + 1):
        yp[k] = plant.C @ z[:n_p]
        ym[k] = ref.cm @ z[n_p:]
        if k < N:
            z = rk4_step(f, z, ts[k], dt)
    return ts, yp, ym


# --- trace CSV -------------------------------------------------------------

def _expand(name: str, arr: np.ndarray, n_rows: int):
    a = np.asarray(arr).reshape(n_rows, -1)
    if a.shape[1] == 1:
        return [name], a
    return [f"{name}_{i + 1}" for i in range(a.shape[1])], a


def trace_columns(trace: SimTrace) -> tuple[list[str], np.ndarray]:
    K = len(trace)
    blocks = [("t", trace.t), ("u_m", trace.u_m), ("y_m_ol", trace.y_m_ol), ("y_mo", trace.y_mo),
              ("y_p", trace.y_p), ("y_aug", trace.y_aug), ("e", trace.e), ("u_p", trace.u_p)]
    names, cols = [], []
    for label, arr in blocks:
        nm, a = _expand(label, arr, K)
        names += nm
        cols.append(a)
    names += list(trace.state_names)
    cols.append(trace.x_p.reshape(K, -1))
    if trace.x_pfc.shape[1]:
        nm, a = _expand("x_pfc", trace.x_pfc, K)
        names += nm
        cols.append(a)
    for label in ("k_pe", "k_ie", "k_px", "k_ix", "k_pu", "k_iu"):
        nm, a = _expand(label, getattr(trace, label), K)
        names += nm
        cols.append(a)
    return names, np.hstack(cols)


def write_csv(path, names: Sequence[str], data: np.ndarray, decimate: int = 1) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in data[::decimate]:
            w.writerow([f"{v:.9g}" for v in row])


def write_trace_csv(path, trace: SimTrace, decimate: int = 1) -> None:
    names, data = trace_columns(trace)
    write_csv(path, names, data, decimate)


def read_trace_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty trace file")
    names = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(names))
    return names, data
