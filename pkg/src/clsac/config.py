"""Scenario config files (JSON).

Sections: ``plant``, ``actuator``, ``pfc``, ``reference_model``, ``weights``,
``command``, ``sim`` and optionally ``initial_state``. Matrices are nested
row-major arrays and polynomials are descending coefficient arrays.
``actuator``, ``pfc`` and ``reference_model.lv`` may be ``null``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .adaptive import GainWeights
from .lti import DimensionError, StateSpace, TransferFunction
from .passivity import synthesize_pfc
from .refmodel import RefModelConfig
from .sim import CommandSpec, InitialState, Scenario, SimSettings


class ConfigParseError(ValueError):
    pass


class ConfigValidationError(ValueError):
    pass


def _matrix(x, what):
    try:
        a = np.array(x, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigValidationError(f"{what}: not a numeric array ({exc})") from None
    return np.atleast_2d(a) if a.ndim < 2 else a


def _gamma(val, k, what):
    a = np.asarray(val, dtype=float)
    if a.ndim == 0:
        return float(a) * np.eye(k)
    return _matrix(val, what)


def scenario_from_dict(d: dict) -> Scenario:
    try:
        return _build(d)
    except (KeyError, TypeError) as exc:
        raise ConfigValidationError(f"missing or malformed field: {exc}") from None
    except (DimensionError, ValueError) as exc:
        if isinstance(exc, ConfigValidationError):
            raise
        raise ConfigValidationError(str(exc)) from None


def _build(d: dict) -> Scenario:
    pl = d["plant"]
    plant = StateSpace(_matrix(pl["a"], "plant.a"), _matrix(pl["b"], "plant.b"),
                       _matrix(pl["c"], "plant.c"), pl.get("d"))
    act = d.get("actuator")
    actuator = None
    if act:
        actuator = StateSpace(_matrix(act["a"], "actuator.a"), _matrix(act["b"], "actuator.b"),
                              _matrix(act["c"], "actuator.c"), act.get("d"))
    rm = d["reference_model"]
    lv = rm.get("lv")
    ref = RefModelConfig(_matrix(rm["am"], "am"), _matrix(rm["bm"], "bm"), _matrix(rm["cm"], "cm"),
                         None if lv is None else _matrix(lv, "lv"))
    m = plant.p
    wd = d["weights"]
    weights = GainWeights(
        _gamma(wd["gamma_pe"], m, "gamma_pe"), _gamma(wd["gamma_ie"], m, "gamma_ie"),
        _gamma(wd["gamma_px"], ref.n, "gamma_px"), _gamma(wd["gamma_ix"], ref.n, "gamma_ix"),
        _gamma(wd["gamma_pu"], ref.m_in, "gamma_pu"), _gamma(wd["gamma_iu"], ref.m_in, "gamma_iu"),
        float(wd["sigma"]), bool(wd.get("leak_all", False)),
    )
    pf = d.get("pfc")
    pfc = synthesize_pfc(TransferFunction(pf["c_num"], pf["c_den"])) if pf else None
    cd = d.get("command", {})
    command = CommandSpec(cd.get("kind", "square"), _scalar_or_tuple(cd.get("amplitude", 0.1745)),
                          float(cd.get("period", 20.0)), _scalar_or_tuple(cd.get("offset", 0.0)))
    sd = d.get("sim", {})
    sim = SimSettings(float(sd.get("dt", 1e-3)), float(sd.get("t_final", 40.0)), int(sd.get("decimate", 1)))
    ini = d.get("initial_state") or {}
    initial = InitialState(**{k: ini.get(k) for k in ("plant", "pfc", "ref", "k_ie", "k_ix", "k_iu")})
    names = d.get("state_names")
    return Scenario(name=d.get("name", "scenario"), plant=plant, ref=ref, weights=weights,
                    command=command, sim=sim, pfc=pfc, actuator=actuator, initial=initial,
                    state_names=tuple(names) if names else None)


def _scalar_or_tuple(v):
    return tuple(float(x) for x in v) if isinstance(v, (list, tuple)) else float(v)


def load_scenario(path) -> Scenario:
    text = Path(path).read_text()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(d, dict):
        raise ConfigParseError(f"{path}:1:1: top level must be an object")
    return scenario_from_dict(d)


def _m(a):
    return np.asarray(a).tolist()


def scenario_to_dict(sc: Scenario) -> dict:
    def ss(s: StateSpace, with_d: bool):
        out = {"a": _m(s.A), "b": _m(s.B), "c": _m(s.C)}
        if with_d and np.any(s.D):
            out["d"] = _m(s.D)
        return out

    w = sc.weights
    ini = sc.initial
    return {
        "name": sc.name,
        "plant": ss(sc.plant, True),
        "actuator": ss(sc.actuator, True) if sc.actuator is not None else None,
        "state_names": list(sc.state_names) if sc.state_names else None,
        "pfc": {"c_num": sc.pfc.C_s.num.tolist(), "c_den": sc.pfc.C_s.den.tolist()} if sc.pfc else None,
        "reference_model": {"am": _m(sc.ref.am), "bm": _m(sc.ref.bm), "cm": _m(sc.ref.cm),
                            "lv": _m(sc.ref.lv) if sc.ref.lv is not None else None},
        "weights": {"gamma_pe": _m(w.gamma_pe), "gamma_ie": _m(w.gamma_ie), "gamma_px": _m(w.gamma_px),
                    "gamma_ix": _m(w.gamma_ix), "gamma_pu": _m(w.gamma_pu), "gamma_iu": _m(w.gamma_iu),
                    "sigma": w.sigma, "leak_all": w.leak_all},
        "command": {"kind": sc.command.kind,
                    "amplitude": list(sc.command.amplitude) if isinstance(sc.command.amplitude, tuple) else sc.command.amplitude,
                    "period": sc.command.period,
                    "offset": list(sc.command.offset) if isinstance(sc.command.offset, tuple) else sc.command.offset},
        "sim": {"dt": sc.sim.dt, "t_final": sc.sim.t_final, "decimate": sc.sim.decimate},
        "initial_state": {k: (None if getattr(ini, k) is None else _m(getattr(ini, k)))
                          for k in ("plant", "pfc", "ref", "k_ie", "k_ix", "k_iu")},
    }


def save_scenario(sc: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(sc), indent=2) + "\n")
