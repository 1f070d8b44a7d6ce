import numpy as np
import pytest

from clsac import kernel
from clsac.adaptive import GainWeights
from clsac.lti import StateSpace
from clsac.refmodel import NotConfiguredError, RefModelConfig
from clsac.scenarios import default_scenarios, mav_scenario
from clsac.sim import (CommandSpec, DivergenceError, InitialState, Scenario, SimSettings, SimTrace,
                       command_value, metrics, read_trace_csv, rk4_step, run, trace_columns,
                       write_csv, write_trace_csv)

BACKENDS = kernel.available_backends()


def test_rk4_examples():
    assert rk4_step(lambda t, x: np.zeros_like(x), [3.0], 0, 0.1) == pytest.approx([3.0])
    assert rk4_step(lambda t, x: -x, [1.0], 0, 0.1)[0] == pytest.approx(0.9048375, abs=1e-7)
    assert rk4_step(lambda t, x: np.ones_like(x), [0.0], 0, 0.01)[0] == 0.01


def test_rk4_divergence():
    with pytest.raises(DivergenceError, match="numerical divergence at t"):
        rk4_step(lambda t, x: x * 1e308, [1e10], 1.5, 0.1)


def test_command_values():
    step = CommandSpec("step", 0.1745)
    assert command_value(step, 3.0) == pytest.approx([0.1745])
    sq = CommandSpec("square", 0.1745, 20.0)
    assert command_value(sq, 5.0) == pytest.approx([0.1745])
    assert command_value(sq, 15.0) == pytest.approx([-0.1745])
    assert command_value(CommandSpec("constant", 0.0), 7.0) == pytest.approx([0.0])
    assert command_value(CommandSpec("square", 1.0, 4.0, 0.5), 3.0) == pytest.approx([-0.5])


def test_default_scenarios():
    sets = default_scenarios()
    assert sets["sac"].ref.lv is None
    assert sets["clsac"].ref.lv.item() == 20
    assert [s.ref.lv.item() for s in sets["lv_sweep"]] == [10, 50, 100]
    P = sets["clsac"].augmented_plant
    assert np.array_equal(P.C, [[0, 0, 0, 1, 0, 0]])
    assert np.array_equal(P.B.ravel(), [0, 0, 0, 0, 0, 2367])
    assert (P.C @ P.B).item() == 0
    ev = np.linalg.eigvals(P.A)
    assert np.min(np.abs(ev - (-36.11 + 32.60j))) < 5e-3


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("controller", ["sac", "clsac"])
def test_zero_command_equilibrium(backend, controller):
    sc = mav_scenario(command=CommandSpec("constant", 0.0), sim=SimSettings(1e-3, 0.5))
    tr = run(sc, controller, backend)
    names, data = trace_columns(tr)
    assert len(tr) == 501
    assert np.all(data[:, 1:] == 0)


def test_record_count_and_grid():
    tr = run(mav_scenario(sim=SimSettings(1e-3, 0.25)))
    assert len(tr) == 251 and np.allclose(np.diff(tr.t), 1e-3)


def test_clsac_requires_lv():
    with pytest.raises(NotConfiguredError):
        run(mav_scenario(lv=None), "clsac")


def test_backends_agree():
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    sc = mav_scenario(sim=SimSettings(1e-3, 2.0))
    a, b = trace_columns(run(sc, "clsac", "compiled"))[1], trace_columns(run(sc, "clsac", "python"))[1]
    assert np.allclose(a, b, rtol=1e-10, atol=1e-12)


def test_determinism():
    sc = mav_scenario(sim=SimSettings(1e-3, 2.0))
    assert np.array_equal(trace_columns(run(sc))[1], trace_columns(run(sc))[1])


def test_cl_collapses_to_open_loop_on_step():
    sc = mav_scenario(command=CommandSpec("step", 0.1745), sim=SimSettings(1e-3, 20.0))
    tr = run(sc, "clsac")
    tail = slice(int(0.8 * len(tr)), None)
    assert np.max(np.abs(tr.y_mo[tail] - tr.y_m_ol[tail])) <= 1e-2 * 0.1745


def test_sac_converges_on_small_step():
    sc = mav_scenario(lv=None, command=CommandSpec("step", 0.1), sim=SimSettings(1e-3, 20.0))
    tr = run(sc, "sac")
    tail = slice(int(0.8 * len(tr)), None)
    assert np.max(np.abs(tr.e[tail])) <= 0.02 * 0.1


def test_clsac_beats_sac_on_moderate_square():
    sc = mav_scenario(command=CommandSpec("square", 0.1, 20.0), sim=SimSettings(1e-3, 40.0))
    m_s, m_c = metrics(run(sc, "sac")), metrics(run(sc, "clsac"))
    assert m_c.rms_tracking_error < m_s.rms_tracking_error


def test_lv_zero_matches_sac():
    sc = mav_scenario(sim=SimSettings(1e-3, 5.0))
    a = run(sc.with_lv(None), "sac")
    b = run(sc.with_lv([[0.0]]), "clsac")
    assert np.allclose(a.y_p, b.y_p, atol=1e-12) and np.allclose(a.u_p, b.u_p, atol=1e-12)


def _toy(**kw):
    base = dict(name="toy", plant=StateSpace([[-1]], [[1]], [[1]]),
                ref=RefModelConfig([[-5]], [[5]], [[1]], [[2.0]]),
                weights=GainWeights.uniform(1.0, 1.0), command=CommandSpec("step", 1.0),
                sim=SimSettings(1e-2, 1.0))
    base.update(kw)
    return Scenario(**base)


@pytest.mark.parametrize("backend", BACKENDS)
def test_divergence_reported(backend):
    sc = _toy(plant=StateSpace([[200.0]], [[0.0]], [[1]]),
              command=CommandSpec("constant", 0.0), sim=SimSettings(1e-2, 20.0),
              initial=InitialState(plant=[1.0]))
    with pytest.raises(DivergenceError) as exc:
        run(sc, "clsac", backend)
    assert 0 < exc.value.t < 20


def test_scenario_validation():
    with pytest.raises(ValueError):
        _toy(ref=RefModelConfig(-np.eye(2), np.ones((2, 1)), np.eye(2)))


def _trace(u, dt=1e-3):
    n = len(u)
    z = np.zeros((n, 1))
    return SimTrace("sac", dt, np.arange(n) * dt, z, z, z, z, z, z, np.asarray(u, float).reshape(n, 1),
                    z, np.zeros((n, 0)), z, z, *(np.zeros((n, 1, 1)),) * 6, state_names=("x",))


def test_metrics_examples():
    m = metrics(_trace(np.zeros(100)))
    assert all(v == 0 for v in m.as_dict().values())
    m = metrics(_trace(np.ones(10000)))
    assert m.control_energy == pytest.approx(10) and m.control_total_variation == 0
    with pytest.raises(ValueError):
        metrics(_trace(np.zeros(0)))


def test_trace_csv_roundtrip(tmp_path):
    tr = run(mav_scenario(sim=SimSettings(1e-3, 1.0)))
    path = tmp_path / "trace.csv"
    write_trace_csv(path, tr)
    names, data = read_trace_csv(path)
    want_names, want = trace_columns(tr)
    assert names == want_names
    assert names[:14] == ["t", "u_m", "y_m_ol", "y_mo", "y_p", "y_aug", "e", "u_p",
                          "v", "p", "r", "phi", "delta_r", "delta_r_dot"]
    assert np.allclose(data, want, rtol=1e-8, atol=1e-300)
    write_csv(tmp_path / "again.csv", names, data)
    assert (tmp_path / "again.csv").read_bytes() == path.read_bytes()


def _default_backend(env=None, prelude=""):
    import os
    import subprocess
    import sys
    code = prelude + "from clsac.kernel import DEFAULT_BACKEND; print(DEFAULT_BACKEND)"
    r = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                       env={**os.environ, **(env or {})})
    return r.stdout.strip()


def test_backend_env_override():
    assert _default_backend({"CLSAC_BACKEND": "python"}) == "python"


def test_fallback_when_extension_missing():
    prelude = "import sys; sys.modules['clsac._core'] = None\n"
    assert _default_backend(prelude=prelude) == "python"


def test_unknown_backend():
    with pytest.raises(ValueError, match="unknown or unavailable backend"):
        kernel.get_kernel("fortran")
