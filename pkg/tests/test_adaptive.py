import numpy as np
import pytest
from hypothesis import given, strategies as st

from clsac.adaptive import AdaptiveGains, GainWeights, control, integral_gain_derivatives, proportional_gains
from clsac.sim import rk4_step

W = GainWeights.uniform(10.0, 5.0)


def test_weights_validation():
    with pytest.raises(ValueError):
        GainWeights.uniform(-1.0, 5.0)
    with pytest.raises(ValueError):
        GainWeights.uniform(10.0, 0.0)


def test_proportional_examples():
    assert all(np.all(k == 0) for k in proportional_gains([0], [2], [1], W))
    k_pe, k_px, k_pu = proportional_gains([0.5], [2], [1], W)
    assert (k_pe.item(), k_px.item(), k_pu.item()) == pytest.approx((2.5, 10, 5))


def test_integral_examples():
    g = AdaptiveGains([[4.0]], [[0.0]], [[0.0]])
    d_ie, d_ix, d_iu = integral_gain_derivatives([0], [1], [1], g, W)
    assert d_ie.item() == pytest.approx(-20) and d_ix.item() == 0 and d_iu.item() == 0
    d_ie, _, _ = integral_gain_derivatives([1], [0], [0], AdaptiveGains.zeros(1, 1, 1), W)
    assert d_ie.item() == pytest.approx(10)


def test_leak_all_flag():
    w = GainWeights.uniform(10.0, 5.0, leak_all=True)
    g = AdaptiveGains([[0.0]], [[2.0]], [[3.0]])
    _, d_ix, d_iu = integral_gain_derivatives([0], [1], [1], g, w)
    assert d_ix.item() == pytest.approx(-10) and d_iu.item() == pytest.approx(-15)


def test_control_examples():
    assert control([0], [0], [0], AdaptiveGains.zeros(1, 1, 1), W) == pytest.approx([0])
    g = AdaptiveGains([[2.0]], [[0.0]], [[0.0]])
    assert control([1], [0], [0], g, W) == pytest.approx([12])


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=2), st.floats(0.1, 50))
def test_k_pe_symmetric_psd(e, gamma):
    w = GainWeights.uniform(gamma, 1.0, m=2)
    k_pe, _, _ = proportional_gains(e, [0], [0], w)
    assert np.allclose(k_pe, k_pe.T)
    assert np.all(np.linalg.eigvalsh(k_pe) >= -1e-12)


def _integrate_k_ie(e, k0, t_final, dt=1e-3):
    f = lambda t, k: integral_gain_derivatives([e], [0], [0], AdaptiveGains([[k[0]]], [[0]], [[0]]), W)[0].ravel()
    k = np.array([k0])
    traj = [k0]
    for i in range(int(round(t_final / dt))):
        k = rk4_step(f, k, i * dt, dt)
        traj.append(k[0])
    return np.array(traj)


def test_sigma_boundedness_constant_error():
    traj = _integrate_k_ie(0.8, 0.0, 3.0)
    assert np.all(traj <= 0.8**2 * 10 / 5 + 1e-12)
