import numpy as np
import pytest
from hypothesis import given, strategies as st

from clsac.bounds import bound_report, error_system_matrices


def test_scalar_example():
    a_mm, a_mn = error_system_matrices([[1]], [[2]], [[1]], [[20]])
    assert a_mm.item() == -2 and a_mn.item() == -22
    r = bound_report(a_mm, a_mn)
    assert r.lambda_max_s1 == pytest.approx(2) and r.lambda_max_s2 == pytest.approx(22)
    assert r.bound_ratio == pytest.approx(np.sqrt(11)) and r.applicable


def test_lv_absent_or_zero():
    for lv in (None, [[0.0]]):
        a_mm, a_mn = error_system_matrices([[1]], [[2]], [[1]], lv)
        assert np.array_equal(a_mm, a_mn)
    assert bound_report([[-2]], [[-2]]).bound_ratio == pytest.approx(1)


def test_q_scaling():
    r1 = bound_report([[-2]], [[-22]])
    r2 = bound_report([[-2]], [[-22]], q=2 * np.eye(1))
    assert r2.lambda_max_s1 == pytest.approx(r1.lambda_max_s1 / 2)
    assert r2.bound_ratio == pytest.approx(r1.bound_ratio)


def test_indefinite_q_rejected():
    with pytest.raises(ValueError):
        bound_report([[-2]], [[-2]], q=[[-1]])


def test_inapplicable_flag():
    r = bound_report([[1]], [[-2]])
    assert not r.applicable and "bound inapplicable" in r.as_text()


@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 10))
def test_ratio_invariant_under_q_scale(k, lv, c):
    a_mm, a_mn = error_system_matrices([[2.5]], [[k]], [[1]], [[lv]])
    assert bound_report(a_mm, a_mn, q=c * np.eye(1)).bound_ratio == pytest.approx(
        bound_report(a_mm, a_mn).bound_ratio)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_linear_in_ke_and_lv(k1, k2, lv):
    cb, cm = np.array([[1.5, 0.2], [0.1, 2.0]]), np.eye(2)
    K1, K2 = k1 * np.eye(2), k2 * np.ones((2, 2))
    a1, _ = error_system_matrices(cb, K1, cm)
    a2, _ = error_system_matrices(cb, K2, cm)
    a12, _ = error_system_matrices(cb, K1 + K2, cm)
    assert np.allclose(a12, a1 + a2)
    _, n1 = error_system_matrices(cb, K1, cm, lv * np.eye(2))
    _, n2 = error_system_matrices(cb, K1, cm, 2 * lv * np.eye(2))
    assert np.allclose(n2 - a1, 2 * (n1 - a1))
