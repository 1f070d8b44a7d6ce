"""Wall-clock comparison of the compiled and pure-Python integration kernels.

    python3 benchmarks/bench_kernel.py --t-final 5 --repeat 3
"""

import argparse
import time

import numpy as np

from clsac.kernel import available_backends
from clsac.scenarios import mav_scenario
from clsac.sim import SimSettings, run, trace_columns


def time_backend(sc, backend, controller, repeat):
    best, trace = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        trace = run(sc, controller, backend)
        best = min(best, time.perf_counter() - t0)
    return best, trace


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--t-final", type=float, default=5.0)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--controller", choices=["sac", "clsac"], default="clsac")
    args = ap.parse_args(argv)

    sc = mav_scenario(sim=SimSettings(args.dt, args.t_final))
    steps = sc.sim.n_steps
    results = {}
    for name in available_backends():
        results[name] = time_backend(sc, name, args.controller, args.repeat)
        secs = results[name][0]
        print(f"{name:>9}: {secs:8.3f} s  ({steps / secs:12.0f} steps/s)")
    if len(results) == 2:
        (tc, trc), (tp, trp) = results["compiled"], results["python"]
        diff = np.max(np.abs(trace_columns(trc)[1] - trace_columns(trp)[1]))
        print(f"speedup: {tp / tc:.1f}x, max trace difference {diff:.2e}")
    else:
        print("compiled backend unavailable; only the fallback was timed")


if __name__ == "__main__":
    main()
