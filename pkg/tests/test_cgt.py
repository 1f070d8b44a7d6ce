import numpy as np
import pytest

from clsac.cgt import CgtError, IdealGains, cgt_residual, solve_cgt_closedloop, solve_cgt_openloop
from clsac.lti import StateSpace
from clsac.refmodel import RefModelConfig
from clsac.scenarios import build_augmented_plant, reference_model

SCALAR_PLANT = StateSpace([[-1]], [[1]], [[1]])
SCALAR_REF = RefModelConfig([[-5]], [[5]], [[1]])


def test_scalar_open_loop():
    S = solve_cgt_openloop(SCALAR_PLANT, SCALAR_REF)
    assert (S.s11.item(), S.s12.item(), S.s21.item(), S.s22.item()) == pytest.approx((1, 0, -4, 5))
    assert S.residual <= 1e-12


def test_identity_following():
    S = solve_cgt_openloop(StateSpace([[-5]], [[5]], [[1]]), SCALAR_REF)
    assert (S.s11.item(), S.s12.item(), S.s21.item(), S.s22.item()) == pytest.approx((1, 0, 0, 1))


def test_mav_open_loop_residual():
    P = build_augmented_plant()
    S = solve_cgt_openloop(P, reference_model())
    assert S.residual <= 1e-8 * (1 + S.norm())
    assert np.allclose(P.C @ S.s11, [[1]]) and np.allclose(P.C @ S.s12, 0, atol=1e-10)


def test_residual_sensitivity_linear():
    S = solve_cgt_openloop(SCALAR_PLANT, SCALAR_REF)
    r = [cgt_residual(SCALAR_PLANT, SCALAR_REF,
                      IdealGains(S.s11 + d, S.s12, S.s21, S.s22, 0, 0)) for d in (1e-3, 2e-3)]
    assert r[1] == pytest.approx(2 * r[0], rel=1e-6)


def test_closed_loop_lv_zero_is_open_loop():
    S0 = solve_cgt_openloop(SCALAR_PLANT, SCALAR_REF)
    S = solve_cgt_closedloop(SCALAR_PLANT, SCALAR_REF.with_lv([[0.0]]), S0)
    assert np.allclose(S.s11, S0.s11) and np.allclose(S.s22, S0.s22)


def test_closed_loop_scalar_lv_one():
    ref = SCALAR_REF.with_lv([[1.0]])
    S = solve_cgt_closedloop(SCALAR_PLANT, ref)
    assert S.residual <= 1e-10
    assert cgt_residual(SCALAR_PLANT, ref, S) <= 1e-10


def test_closed_loop_mav():
    P = build_augmented_plant()
    S = solve_cgt_closedloop(P, reference_model(20.0))
    assert S.residual <= 1e-8 * (1 + S.norm())


def test_singular_system_reports_condition():
    plant = StateSpace([[-1, 0], [0, -2]], [[1], [1]], [[0, 0]])
    with pytest.raises(CgtError, match="CGT solution does not exist"):
        solve_cgt_openloop(plant, SCALAR_REF)
