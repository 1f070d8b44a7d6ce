"""Command-line front end.

Exit codes: 0 success, 2 config parse error, 3 validation error,
4 numerical divergence, 5 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import scenarios
from .bounds import BoundReport, bound_report, error_system_matrices
from .cgt import CgtError, solve_cgt_closedloop, solve_cgt_openloop
from .config import ConfigParseError, ConfigValidationError, load_scenario, save_scenario
from .lti import DimensionError, TransferFunction, ss_to_tf
from .passivity import (augment_plant, check_waspr_sufficient, default_sweep_gains,
                        gain_sweep_stability, parallel_realization, write_sweep_csv)
from .refmodel import NotConfiguredError
from .sim import (DivergenceError, Metrics, Scenario, SimTrace, metrics, read_trace_csv, run,
                  write_csv, write_trace_csv)

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_DIVERGENCE, EXIT_IO = 0, 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class RunReport:
    scenario: str
    controller: str
    metrics: Metrics
    bound: BoundReport | None = None
    files: list[str] = field(default_factory=list)
    wall_clock: float = 0.0

    def as_text(self) -> str:
        lines = [f"scenario: {self.scenario}", f"controller: {self.controller}"]
        lines += [f"{k}: {v:.9g}" for k, v in self.metrics.as_dict().items()]
        if self.bound is not None:
            lines.append(self.bound.as_text())
        lines += [f"file: {f}" for f in self.files]
        lines.append(f"wall_clock_s: {self.wall_clock:.3f}")
        return "\n".join(lines)


def fmt_coeffs(coeffs) -> str:
    return "[" + ", ".join(f"{c + 0.0:.10g}" for c in coeffs) + "]"  # +0.0 folds -0 into 0


def fmt_tf(label: str, tf: TransferFunction) -> str:
    return f"{label} num: {fmt_coeffs(tf.num.coeffs)}, den: {fmt_coeffs(tf.den.coeffs)}"


def _load(args) -> Scenario:
    if args.config is None:
        sc = scenarios.mav_scenario()
    else:
        sc = load_scenario(args.config)
    sim_kw = {}
    if getattr(args, "dt", None) is not None:
        sim_kw["dt"] = args.dt
    if getattr(args, "t_final", None) is not None:
        sim_kw["t_final"] = args.t_final
    if getattr(args, "decimate", None) is not None:
        sim_kw["decimate"] = args.decimate
    return sc.with_sim(**sim_kw) if sim_kw else sc


def _outdir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot create output directory {out}: {exc}") from None
    return out


def cmd_tf(args) -> int:
    sc = _load(args)
    P = sc.augmented_plant
    if not P.is_siso:
        raise CliError(EXIT_VALIDATION, f"SISO required, plant is {P.p}x{P.m}")
    T = ss_to_tf(P)
    print(fmt_tf("T(s)", T))
    record = {"T": {"num": T.num.tolist(), "den": T.den.tolist()}}
    if sc.pfc is not None:
        aug = augment_plant(T, sc.pfc.D_s)
        print(fmt_tf("D(s)", sc.pfc.D_s))
        print(fmt_tf("F(s)", aug.F))
        print(f"F relative degree: {aug.relative_degree}, minimum phase: {aug.minimum_phase}")
        record["D"] = {"num": sc.pfc.D_s.num.tolist(), "den": sc.pfc.D_s.den.tolist()}
        record["F"] = {"num": aug.F.num.tolist(), "den": aug.F.den.tolist()}
    if args.out:
        out = _outdir(args.out)
        (out / "tf.json").write_text(json.dumps(record, indent=2) + "\n")
    return EXIT_OK


def cmd_check_waspr(args) -> int:
    sc = _load(args)
    P = sc.augmented_plant
    v = check_waspr_sufficient(P)
    print(f"plant: {v.status}" + (f" ({'; '.join(v.reasons)})" if v.reasons else ""))
    if sc.pfc is None:
        return EXIT_OK
    va = check_waspr_sufficient(parallel_realization(P, sc.pfc))
    print(f"plant + D(s): {va.status}" + (f" ({'; '.join(va.reasons)})" if va.reasons else ""))
    aug = augment_plant(ss_to_tf(P), sc.pfc.D_s)
    print(f"F relative degree: {aug.relative_degree}, minimum phase: {aug.minimum_phase}")
    gains = default_sweep_gains() if not args.values else _parse_values(args.values)
    pts = gain_sweep_stability(aug.F, gains)
    n_stable = sum(p.stable for p in pts)
    print(f"gain sweep: {n_stable}/{len(pts)} stable over k in [{gains[0]:.3g}, {gains[-1]:.3g}]")
    if args.out:
        write_sweep_csv(_outdir(args.out) / "gain_sweep.csv", pts)
    return EXIT_OK


def cmd_synthesize_pfc(args) -> int:
    sc = _load(args)
    if sc.pfc is None:
        raise CliError(EXIT_VALIDATION, "config has no pfc section")
    d = sc.pfc
    print(fmt_tf("C(s)", d.C_s))
    print(fmt_tf("D(s)", d.D_s))
    print(f"d0: {d.d0:.10g}")
    R = d.D_realization
    print(f"realization A: {R.A.tolist()}, B: {R.B.tolist()}, C: {R.C.tolist()}")
    P = sc.augmented_plant
    if P.is_siso:
        aug = augment_plant(ss_to_tf(P), d.D_s)
        print(fmt_tf("F(s)", aug.F))
        print(f"F relative degree: {aug.relative_degree}, minimum phase: {aug.minimum_phase}, "
              f"w-aspr: {aug.waspr}")
    return EXIT_OK


def _bound_from_trace(sc: Scenario, ke: np.ndarray) -> BoundReport:
    P = sc.augmented_plant
    if sc.pfc is not None:
        P = parallel_realization(P, sc.pfc)
    a_mm, a_mn = error_system_matrices(P.C @ P.B, ke, sc.ref.cm, sc.ref.lv)
    return bound_report(a_mm, a_mn)


def _final_ke(tr: SimTrace) -> np.ndarray:
    return tr.k_pe[-1] + tr.k_ie[-1]


def _write_metrics(path: Path, name: str, controller: str, m: Metrics) -> None:
    lines = [f"scenario = {name}", f"controller = {controller}"]
    lines += [f"{k} = {v:.9g}" for k, v in m.as_dict().items()]
    path.write_text("\n".join(lines) + "\n")


def cmd_run(args) -> int:
    sc = _load(args)
    if args.controller == "clsac" and sc.ref.lv is None:
        raise NotConfiguredError("closed-loop gain not configured")
    out = _outdir(args.out)
    t0 = time.perf_counter()
    tr = run(sc, args.controller, backend=args.backend)
    m = metrics(tr)
    trace_path, metrics_path = out / "trace.csv", out / "metrics.txt"
    write_trace_csv(trace_path, tr, sc.sim.decimate)
    _write_metrics(metrics_path, sc.name, args.controller, m)
    rep = RunReport(sc.name, args.controller, m, files=[str(trace_path), str(metrics_path)],
                    wall_clock=time.perf_counter() - t0)
    print(rep.as_text())
    return EXIT_OK


def compare_table(m_sac: Metrics, m_cl: Metrics) -> tuple[str, bool]:
    keys = list(m_sac.as_dict())
    lines = [f"{'metric':<26}{'sac':>16}{'clsac':>16}{'clsac/sac':>14}"]
    for k in keys:
        a, b = getattr(m_sac, k), getattr(m_cl, k)
        ratio = b / a if a else float("nan")
        lines.append(f"{k:<26}{a:>16.9g}{b:>16.9g}{ratio:>14.6g}")
    ok_track = m_cl.rms_tracking_error < m_sac.rms_tracking_error
    ok_energy = m_cl.control_energy <= 1.05 * m_sac.control_energy
    lines.append(f"tracking: clsac rms_tracking_error < sac: {'PASS' if ok_track else 'FAIL'}")
    lines.append(f"effort: clsac control_energy <= 1.05 x sac: {'PASS' if ok_energy else 'FAIL'}")
    return "\n".join(lines), ok_track and ok_energy


def cmd_compare(args) -> int:
    sc = _load(args)
    if sc.ref.lv is None:
        raise NotConfiguredError("closed-loop gain not configured")
    out = _outdir(args.out)
    with ThreadPoolExecutor(max_workers=2) as ex:
        fut_s = ex.submit(run, sc, "sac", args.backend)
        fut_c = ex.submit(run, sc, "clsac", args.backend)
        tr_s, tr_c = fut_s.result(), fut_c.result()
    m_s, m_c = metrics(tr_s), metrics(tr_c)
    table, _ = compare_table(m_s, m_c)
    bound = _bound_from_trace(sc, _final_ke(tr_c))
    write_trace_csv(out / "sac_trace.csv", tr_s, sc.sim.decimate)
    write_trace_csv(out / "clsac_trace.csv", tr_c, sc.sim.decimate)
    text = table + "\n\nbound report (final-time Ke of the clsac run)\n" + bound.as_text() + "\n"
    (out / "comparison.txt").write_text(text)
    print(text, end="")
    return EXIT_OK


def _parse_values(s: str) -> np.ndarray:
    try:
        vals = np.array([float(v) for v in s.replace(" ", "").split(",") if v], dtype=float)
    except ValueError:
        raise CliError(EXIT_VALIDATION, f"cannot parse values {s!r}") from None
    if vals.size == 0:
        raise CliError(EXIT_VALIDATION, "no values given")
    return vals


def sweep_lv(sc: Scenario, values, backend=None, jobs: int = 1):
    """Run CL-SAC once per Lv value (Lv = 0 is plain SAC). Returns ``[(lv, trace)]`` sorted by Lv."""
    m = sc.augmented_plant.p
    n_m = sc.ref.n

    def one(lv):
        if lv < 0:
            raise CliError(EXIT_VALIDATION, "Lv values must be nonnegative")
        if lv == 0:
            return lv, run(sc.with_lv(None), "sac", backend)
        return lv, run(sc.with_lv(lv * np.eye(n_m, m)), "clsac", backend)

    vals = sorted(float(v) for v in values)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(one, vals))
    return [one(v) for v in vals]


def monotonicity_verdicts(rows) -> dict:
    e = [r[1].rms_model_error for r in rows]
    dev = [r[1].rms_model_deviation for r in rows]
    en = [r[1].control_energy for r in rows]
    return {
        "rms_e_my strictly decreasing": all(b < a for a, b in zip(e, e[1:])),
        "rms deviation from open-loop model strictly increasing": all(b > a for a, b in zip(dev, dev[1:])),
        "control_energy non-increasing": all(b <= a for a, b in zip(en, en[1:])),
    }


def cmd_sweep_lv(args) -> int:
    sc = _load(args)
    values = _parse_values(args.values) if args.values else np.array(scenarios.LV_SWEEP)
    if np.any(values < 0):
        raise CliError(EXIT_VALIDATION, "Lv values must be nonnegative")
    out = _outdir(args.out)
    results = sweep_lv(sc, values, args.backend, args.jobs)
    rows = [(lv, metrics(tr)) for lv, tr in results]
    for lv, tr in results:
        write_trace_csv(out / f"trace_lv{lv:g}.csv", tr, sc.sim.decimate)
    names = ["lv", "rms_e_my", "rms_deviation", "rms_tracking_error", "control_energy", "peak_u"]
    data = np.array([[lv, m.rms_model_error, m.rms_model_deviation, m.rms_tracking_error,
                      m.control_energy, m.peak_u] for lv, m in rows])
    write_csv(out / "lv_sweep.csv", names, data)
    for lv, m in rows:
        print(f"lv={lv:g} rms_e_my={m.rms_model_error:.6g} rms_deviation={m.rms_model_deviation:.6g} "
              f"control_energy={m.control_energy:.6g}")
    if len(rows) > 1:
        for label, ok in monotonicity_verdicts(rows).items():
            print(f"{label}: {'PASS' if ok else 'FAIL'}")
    return EXIT_OK


def _fmt_block(name, a) -> str:
    return f"{name} = {np.array2string(np.asarray(a), precision=9, separator=', ')}"


def cmd_cgt_check(args) -> int:
    sc = _load(args)
    P = sc.augmented_plant
    try:
        S = solve_cgt_openloop(P, sc.ref)
    except CgtError as exc:
        raise CliError(EXIT_VALIDATION, str(exc)) from None
    print("open-loop reference model")
    for k in ("s11", "s12", "s21", "s22"):
        print(_fmt_block(k, getattr(S, k)))
    print(f"residual = {S.residual:.3e}")
    if sc.ref.lv is not None:
        try:
            Sc = solve_cgt_closedloop(P, sc.ref, S)
        except CgtError as exc:
            print(f"closed-loop reference model: {exc}")
            return EXIT_OK
        print("closed-loop reference model")
        for k in ("s11", "s12", "s21", "s22"):
            print(_fmt_block(k, getattr(Sc, k)))
        print(f"residual = {Sc.residual:.3e} after {Sc.iterations} iterations")
    return EXIT_OK


def cmd_bounds(args) -> int:
    sc = _load(args)
    if not args.trace:
        raise CliError(EXIT_VALIDATION, "--trace is required")
    try:
        names, data = read_trace_csv(args.trace)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read trace: {exc}") from None
    except ValueError as exc:
        raise CliError(EXIT_PARSE, f"{args.trace}: {exc}") from None
    m = sc.augmented_plant.p
    col = {n: i for i, n in enumerate(names)}

    def block(label):
        if label in col:
            return np.array([[data[-1, col[label]]]])
        keys = [f"{label}_{i + 1}" for i in range(m * m)]
        missing = [k for k in keys if k not in col]
        if missing:
            raise CliError(EXIT_VALIDATION, f"trace lacks column {missing[0]}")
        return np.array([data[-1, col[k]] for k in keys]).reshape(m, m)

    ke = block("k_pe") + block("k_ie")
    print(_bound_from_trace(sc, ke).as_text())
    return EXIT_OK


def cmd_scenarios_export(args) -> int:
    out = _outdir(args.dir)
    sets = scenarios.default_scenarios()
    written = []
    for sc in [sets["sac"], sets["clsac"], *sets["lv_sweep"]]:
        path = out / f"{sc.name}.json"
        save_scenario(sc, path)
        written.append(path)
    for p in written:
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="clsac", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, sim=False):
        p.add_argument("--config", help="scenario JSON file (default: built-in MAV CL-SAC scenario)")
        if sim:
            p.add_argument("--dt", type=float)
            p.add_argument("--t-final", type=float, dest="t_final")
            p.add_argument("--decimate", type=int)
            p.add_argument("--backend", choices=["compiled", "python"], default=None)
        return p

    p = common(sub.add_parser("tf", help="print T(s), D(s), F(s) coefficients"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_tf)

    p = common(sub.add_parser("check-waspr", help="W-ASPR verdicts and gain sweep"))
    p.add_argument("--values", help="comma-separated feedback gains for the sweep")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check_waspr)

    p = common(sub.add_parser("synthesize-pfc", help="parallel feedforward design from C(s)"))
    p.set_defaults(func=cmd_synthesize_pfc)

    p = common(sub.add_parser("run", help="simulate one controller"), sim=True)
    p.add_argument("--controller", choices=["sac", "clsac"], default="clsac")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_run)

    p = common(sub.add_parser("compare", help="paired SAC vs CL-SAC runs"), sim=True)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_compare)

    p = common(sub.add_parser("sweep-lv", help="CL-SAC over several Lv values"), sim=True)
    p.add_argument("--values", help="comma-separated Lv values (default 10,50,100)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_sweep_lv)

    p = common(sub.add_parser("cgt-check", help="ideal-trajectory gains and residuals"))
    p.set_defaults(func=cmd_cgt_check)

    p = common(sub.add_parser("bounds", help="output-error bound report from a trace"))
    p.add_argument("--trace", required=True)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("scenarios", help="built-in scenario utilities")
    ssub = p.add_subparsers(dest="action", required=True)
    pe = ssub.add_parser("export", help="write built-in scenario configs")
    pe.add_argument("dir")
    pe.set_defaults(func=cmd_scenarios_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ConfigValidationError, NotConfiguredError, DimensionError, CgtError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
