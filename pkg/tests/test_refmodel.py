import numpy as np
import pytest
from hypothesis import given, strategies as st

from clsac.refmodel import (NotConfiguredError, RefModelConfig, cl_derivative, lv_deviation_bound,
                            ol_derivative)


def scalar(lv=None):
    return RefModelConfig([[-5]], [[5]], [[1]], lv)


def test_ol_examples():
    assert ol_derivative(scalar(), [0], [1]) == pytest.approx([5])
    assert ol_derivative(scalar(), [1], [1]) == pytest.approx([0])
    cfg = RefModelConfig([[0, 1], [-2, -3]], [[0], [1]], [[1, 0]])
    assert np.allclose(ol_derivative(cfg, [1, 0], [1]), [0, -1])


def test_cl_examples():
    assert cl_derivative(scalar([[20]]), [0], [1], [0]) == pytest.approx([5])
    assert cl_derivative(scalar([[20]]), [1], [0], [0.5]) == pytest.approx([-15])


def test_cl_requires_lv():
    with pytest.raises(NotConfiguredError, match="closed-loop gain not configured"):
        cl_derivative(scalar(), [0], [1], [0])


def test_rejects_non_hurwitz():
    with pytest.raises(ValueError):
        RefModelConfig([[1]], [[1]], [[1]])


def test_open_loop_drops_lv():
    cfg = scalar([[20]])
    assert cfg.closed_loop and not cfg.open_loop().closed_loop


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0.1, 100))
def test_cl_equals_ol_at_zero_output_error(x, u, lv):
    cfg = RefModelConfig([[-2, 1], [0, -3]], [[1], [2]], [[1, 1]], [[lv], [lv / 2]])
    xm = np.array([x, -x / 3])
    y = cfg.cm @ xm
    assert np.array_equal(cl_derivative(cfg, xm, [u], y), ol_derivative(cfg, xm, [u]))


def test_lv_bound_examples():
    assert lv_deviation_bound(0, 5, 1, 1) == 0
    assert lv_deviation_bound(20, 5, 1, 1) == pytest.approx(6.3246, abs=1e-4)
    assert lv_deviation_bound(40, 5, 1, 1) == pytest.approx(2 * lv_deviation_bound(20, 5, 1, 1))
    with pytest.raises(ValueError):
        lv_deviation_bound(1, 0, 1, 1)
    with pytest.raises(ValueError):
        lv_deviation_bound(1, 1, 1, -1)


@given(st.floats(0.1, 100), st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 10))
def test_lv_bound_monotone(lv, am, v0, lam):
    b = lv_deviation_bound(lv, am, v0, lam)
    assert lv_deviation_bound(lv * 1.5, am, v0, lam) > b
    assert lv_deviation_bound(lv, am, v0 * 1.5, lam) > b
    assert lv_deviation_bound(lv, am * 1.5, v0, lam) < b
    assert lv_deviation_bound(lv, am, v0, lam * 1.5) < b
