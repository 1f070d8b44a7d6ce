import numpy as np
import pytest

from clsac.lti import DimensionError, StateSpace, TransferFunction, ss_to_tf
from clsac.passivity import (WasprCertificate, augment_plant, check_waspr_sufficient,
                             default_sweep_gains, gain_sweep_stability, parallel_realization,
                             synthesize_pfc, verify_waspr_certificate, write_sweep_csv)
from clsac.scenarios import PFC_DEN, PFC_NUM, build_augmented_plant


@pytest.fixture(scope="module")
def mav_F():
    pfc = synthesize_pfc(TransferFunction(PFC_NUM, PFC_DEN))
    return augment_plant(ss_to_tf(build_augmented_plant()), pfc.D_s).F


def test_raw_mav_plant_fails_cb():
    v = check_waspr_sufficient(build_augmented_plant())
    assert not v.passed
    assert "CB spectrum not in open right half plane" in v.reasons


def test_scalar_plant_passes():
    assert check_waspr_sufficient(StateSpace([[-1]], [[1]], [[1]])).passed


def test_pfc_augmented_realization_passes():
    P = build_augmented_plant()
    pfc = synthesize_pfc(TransferFunction(PFC_NUM, PFC_DEN))
    R = parallel_realization(P, pfc)
    assert R.n == 7 and np.allclose(R.C @ R.B, [[2.5]])
    assert check_waspr_sufficient(R).passed


def test_non_square_rejected():
    with pytest.raises(DimensionError):
        check_waspr_sufficient(StateSpace(-np.eye(2), np.ones((2, 1)), np.eye(2)))


def test_mimo_indeterminate():
    v = check_waspr_sufficient(StateSpace(-np.eye(2), np.eye(2), np.eye(2)))
    assert v.status == "indeterminate"


def test_certificate_examples():
    plant = StateSpace([[-1]], [[1]], [[1]])
    cert = WasprCertificate([[1]], [[2]], [[1]], [[0]])
    assert verify_waspr_certificate(plant, cert)
    assert not verify_waspr_certificate(plant, WasprCertificate([[1]], [[2]], [[2]], [[0]]))
    unstable = StateSpace([[1]], [[1]], [[1]])
    assert verify_waspr_certificate(unstable, WasprCertificate([[1]], [[2]], [[1]], [[2]]))


def test_certificate_tol_monotone():
    plant = StateSpace([[-1]], [[1]], [[1]])
    cert = WasprCertificate([[1]], [[2.001]], [[1]], [[0]])
    assert not verify_waspr_certificate(plant, cert, tol=1e-6)
    assert verify_waspr_certificate(plant, cert, tol=1e-3)
    assert verify_waspr_certificate(plant, cert, tol=1e-1)


def test_synthesize_pfc_mav():
    d = synthesize_pfc(TransferFunction([4, 40], [10]))
    assert d.D_s.num.tolist() == [10] and d.D_s.den.tolist() == [4, 40]
    assert d.d0 == 0
    R = d.D_realization
    assert np.allclose(R.A, [[-10]]) and np.allclose(R.B, [[1]]) and np.allclose(R.C, [[2.5]])


def test_synthesize_pfc_static_and_biproper():
    d = synthesize_pfc(TransferFunction([4], [1]))
    assert d.d0 == pytest.approx(0.25) and d.D_realization.n == 0
    d = synthesize_pfc(TransferFunction([1, 1], [1, 2]))
    assert d.d0 == pytest.approx(1.0)
    assert np.allclose(d.D_realization.A, [[-1]]) and np.allclose(d.D_realization.C, [[1]])


def test_synthesize_pfc_improper_inverse():
    with pytest.raises(ValueError, match="compensator inverse improper"):
        synthesize_pfc(TransferFunction([1], [1, 1]))


def test_pfc_double_inversion():
    C = TransferFunction([4, 40], [10])
    again = synthesize_pfc(C).D_s.reciprocal()
    assert np.allclose(again.num.coeffs, C.num.coeffs, atol=1e-12)
    assert np.allclose(again.den.coeffs, C.den.coeffs, atol=1e-12)


def test_augment_identity_and_first_order():
    T = TransferFunction([1], [1, 1])
    aug = augment_plant(T, TransferFunction([0], [1]))
    assert np.allclose(aug.F.num.coeffs, [1]) and np.allclose(aug.F.den.coeffs, [1, 1])
    aug = augment_plant(T, TransferFunction([1], [1, 2]))
    assert np.allclose(aug.F.num.coeffs, [2, 3]) and aug.relative_degree == 1 and aug.minimum_phase


def test_mav_F_minimum_phase_relative_degree_one(mav_F):
    aug = augment_plant(ss_to_tf(build_augmented_plant()),
                        synthesize_pfc(TransferFunction(PFC_NUM, PFC_DEN)).D_s)
    assert aug.relative_degree == 1 and aug.minimum_phase and aug.waspr


def test_sweep_toy_examples():
    pts = gain_sweep_stability(TransferFunction([1], [1, 1]), [1, 10])
    assert np.allclose(pts[0].poles, [-2]) and np.allclose(pts[1].poles, [-11])
    assert all(p.stable for p in pts)
    pts = gain_sweep_stability(TransferFunction([1, -1], [1, 2]), [5])
    assert np.allclose(pts[0].poles, [0.5]) and not pts[0].stable


def test_sweep_rejects_nonpositive_gain():
    with pytest.raises(ValueError):
        gain_sweep_stability(TransferFunction([1], [1, 1]), [0])


def test_mav_sweep_matches_state_space_oracle(mav_F):
    """Root-find of den + k num agrees with eig(A - k B C) of the 7-state realization."""
    R = parallel_realization(build_augmented_plant(), synthesize_pfc(TransferFunction(PFC_NUM, PFC_DEN)))
    for p in gain_sweep_stability(mav_F, [0.1, 1, 10, 100, 1000]):
        ref = np.linalg.eigvals(R.A - p.gain * R.B @ R.C)
        assert max(ref.real) == pytest.approx(max(p.poles.real), abs=1e-6)
        assert p.stable == (max(ref.real) < -1e-9)


def test_mav_sweep_stable_above_threshold(mav_F):
    pts = gain_sweep_stability(mav_F, default_sweep_gains())
    assert len(pts) == 50 and pts[0].stable
    flags = [p.stable for p in pts]
    first_tail = max(i for i, f in enumerate(flags) if not f) + 1
    assert first_tail < len(pts) and all(flags[first_tail:])


def test_sweep_csv(tmp_path, mav_F):
    pts = gain_sweep_stability(mav_F, [0.1, 1e4])
    path = tmp_path / "sweep.csv"
    write_sweep_csv(path, pts)
    rows = path.read_text().splitlines()
    assert rows[0].startswith("gain,pole_re_1,pole_im_1") and rows[0].endswith("stable")
    assert len(rows) == 3
