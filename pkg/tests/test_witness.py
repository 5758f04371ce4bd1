import numpy as np
import pytest

from chanwit.channels import choi_of_channel, make_rp, make_ru, random_ru_channel
from chanwit.core import DensityOperator, PureState, flip_operator, max_abs_diff
from chanwit.oracle import OptimizerConfig, haar_unitary, me_state, optimize_me, optimize_sep
from chanwit.witness import (
    ENTANGLED,
    NOT_ME_MIXTURE,
    WitnessBounds,
    auto_bounds,
    bounds_flip,
    bounds_numerical,
    bounds_product,
    bounds_rank_one,
    flip_observable,
    product_factors,
    rank_one_factor,
    scale_bounds,
    stationarity_certificate,
    unitality_test,
    verdict,
    white_noise_threshold,
)

from conftest import BELL, PARTIAL, SINGLET, random_complex, random_hermitian, random_psd, random_pure

CFG = OptimizerConfig(seed=3, restarts=12)


def assert_chain(b: WitnessBounds, tol=1e-9):
    assert b.g_min - tol <= b.gME_min <= b.gME_max + tol <= b.g_max + 2 * tol
    assert b.g_min - tol <= b.gS_min <= b.gS_max + tol <= b.g_max + 2 * tol


def oracle_bounds(l):
    me, sep = optimize_me(l, CFG), optimize_sep(l, CFG)
    return me.best_value, me.worst_value, sep.best_value, sep.worst_value


def test_product_examples():
    b = bounds_product(np.eye(2), np.eye(2))
    assert b.gME_max == b.gME_min == 1
    p = np.diag([0.0, 1.0])
    b = bounds_product(p, p)
    assert (b.gME_max, b.gME_min, b.gS_max, b.gS_min) == (0.5, 0.0, 1.0, 0.0)
    me_max, me_min, s_max, s_min = oracle_bounds(np.kron(p, p))
    assert abs(me_max - 0.5) < 1e-6 and abs(me_min) < 1e-6 and abs(s_max - 1) < 1e-8 and abs(s_min) < 1e-8
    a, c = np.diag([1.0, 2.0]), np.diag([3.0, 4.0])
    b = bounds_product(a, c)
    assert (b.gME_max, b.gME_min, b.gS_max, b.gS_min) == (5.5, 5.0, 8.0, 3.0)
    me_max, me_min, s_max, s_min = oracle_bounds(np.kron(a, c))
    assert abs(me_max - 5.5) < 1e-6 and abs(me_min - 5) < 1e-6
    assert abs(s_max - 8) < 1e-8 and abs(s_min - 3) < 1e-8


def test_product_identity_gives_unitality_constraint(rng):
    b = random_psd(rng, 3)
    bounds = bounds_product(np.eye(3), b)
    assert abs(bounds.gME_max - np.trace(b).real / 3) < 1e-12
    assert abs(bounds.gME_min - bounds.gME_max) < 1e-12


def test_product_validation():
    with pytest.raises(ValueError):
        bounds_product(np.diag([1.0, -1.0]), np.eye(2))
    with pytest.raises(ValueError):
        bounds_product(np.array([[1, 1], [0, 1]]), np.eye(2))


def test_product_admissibility(rng):
    for d in (2, 3, 4):
        b = bounds_product(random_psd(rng, d), random_psd(rng, d))
        assert b.gME_max < b.g_max and b.gS_max == b.g_max and b.gS_min == b.g_min
        assert_chain(b)


def test_unitality_examples():
    choi = choi_of_channel(make_ru([0.5, 0.5], [np.eye(2), np.diag([1.0, -1.0])]))
    assert max(unitality_test(choi.state)) < 1e-12
    assert unitality_test(DensityOperator(3, np.eye(9) / 9)) == (0.0, 0.0)
    ket = np.array([1.0, 0, 0, 0])
    dev = unitality_test(DensityOperator(2, np.outer(ket, ket)))
    assert max_abs_diff(dev, [0.5, 0.5]) < 1e-15
    rp = choi_of_channel(make_rp([1.0], [(np.array([1.0, 0]), np.array([1.0, 0]))]))
    assert min(unitality_test(rp.state)) > 1e-8


def test_flip_examples():
    b = bounds_flip(np.eye(2), np.eye(2))
    assert (b.g_max, b.g_min, b.gS_min, b.gME_max, b.gME_min) == (1, -1, 0, 1, -1)
    me_max, me_min, s_max, s_min = oracle_bounds(flip_operator(2))
    assert abs(me_max - 1) < 1e-6 and abs(me_min + 1) < 1e-6 and abs(s_min) < 1e-8

    b = bounds_flip(np.eye(3), np.eye(3))
    assert abs(b.gME_min + 1 / 3) < 1e-15

    a = np.diag([2.0, 1.0])
    b = bounds_flip(np.eye(2), a)
    assert max_abs_diff([b.g_max, b.g_min, b.gME_max, b.gME_min, b.gS_max, b.gS_min], [4, -2, 2.5, -2, 4, 0]) < 1e-14
    me_max, me_min, s_max, s_min = oracle_bounds(flip_observable(np.eye(2), a))
    assert abs(me_max - 2.5) < 1e-6 and abs(me_min + 2) < 1e-6
    assert abs(s_max - 4) < 1e-8 and abs(s_min) < 1e-8


def test_flip_spectral_bounds_match_eigenvalues(rng):
    for d in (2, 3, 4):
        a, c = random_complex(rng, d, d), random_complex(rng, d, d)
        b = bounds_flip(a, c)
        lam = np.linalg.eigvalsh(flip_observable(a, c))
        assert abs(lam[-1] - b.g_max) < 1e-9 * abs(b.g_max)
        assert abs(lam[0] - b.g_min) < 1e-9 * abs(b.g_max)
        assert b.gME_max < b.g_max
        if d >= 3:
            assert b.gME_min > b.g_min
        assert_chain(b)


def test_flip_needs_two_dimensions():
    with pytest.raises(ValueError):
        bounds_flip(np.eye(1), np.eye(1))


def test_rank_one_examples():
    b = bounds_rank_one(PureState(2, BELL), CFG)
    assert abs(b.gME_max - 1) < 1e-15 and abs(b.gS_max - 0.5) < 1e-15
    b = bounds_rank_one(PureState(2, np.array([1.0, 0, 0, 0])), CFG)
    assert abs(b.gME_max - 0.5) < 1e-15 and abs(b.gS_max - 1) < 1e-15
    psi = PureState(2, PARTIAL)
    b = bounds_rank_one(psi, CFG)
    assert abs(b.gME_max - 0.9) < 1e-15 and abs(b.gS_max - 0.8) < 1e-15
    me_max, me_min, s_max, _ = oracle_bounds(psi.projector())
    assert abs(me_max - 0.9) < 1e-6 and abs(s_max - 0.8) < 1e-8
    assert b.numerical_fields == ("gME_min",) and abs(b.gME_min - me_min) < 1e-8
    assert_chain(b)


def test_white_noise_examples():
    psi = PureState(2, PARTIAL)
    p_star = white_noise_threshold(psi)
    assert abs(p_star - 13 / 15) < 1e-15
    proj = psi.projector()
    bounds = bounds_rank_one(psi, CFG)
    for p, n_flags in ((p_star + 0.01, 2), (p_star - 0.01, 1)):
        rho = DensityOperator(2, (1 - p) * np.eye(4) / 4 + p * proj)
        assert len(verdict(proj, rho, bounds).flags) == n_flags
    assert abs(white_noise_threshold(PureState(2, BELL)) - 1) < 1e-15
    assert white_noise_threshold(PureState(2, np.array([1.0, 0, 0, 0]))) == 1


def test_stationarity_examples():
    d = 3
    a, b = np.diag([0.5, 1.0, 2.0]), np.diag([1.0, 3.0, 4.0])
    psi = PureState(d, np.eye(d).reshape(-1) / np.sqrt(d))
    cert = stationarity_certificate(np.kron(a, b), psi)
    assert cert.residual < 1e-10
    assert abs(cert.value - np.diag(a) @ np.diag(b) / d) < 1e-12
    assert max_abs_diff(cert.gamma, b @ a.T / d) < 1e-12

    u = haar_unitary(d, np.random.default_rng(5))
    cert = stationarity_certificate(np.eye(d * d), PureState(d, me_state(u)))
    assert cert.residual < 1e-12 and abs(cert.value - 1) < 1e-12


def test_stationarity_generic_points_are_not_stationary(rng):
    d = 3
    residuals = []
    for _ in range(100):
        l = random_hermitian(rng, d * d)
        cert = stationarity_certificate(l, PureState(d, me_state(haar_unitary(d, rng))))
        residuals.append(cert.residual)
    assert np.min(residuals) > 1e-4


def test_stationarity_validation(rng):
    with pytest.raises(ValueError, match="maximally entangled"):
        stationarity_certificate(np.eye(4), PureState(2, PARTIAL))
    with pytest.raises(ValueError, match="Hermitian"):
        stationarity_certificate(random_complex(rng, 4, 4), PureState(2, BELL))


def test_verdict_examples():
    f = flip_operator(2)
    singlet = DensityOperator(2, np.outer(SINGLET, SINGLET))
    v = verdict(f, singlet, bounds_flip(np.eye(2), np.eye(2)))
    assert v.expectation == pytest.approx(-1, abs=1e-15)
    assert v.flags == {ENTANGLED}
    assert v.margins["gS_min"] == pytest.approx(1.0, abs=1e-15)

    proj = np.outer(BELL, BELL)
    bounds = bounds_rank_one(PureState(2, BELL), CFG)
    assert verdict(proj, DensityOperator(2, proj), bounds).flags == {ENTANGLED}
    ket = np.array([1.0, 0, 0, 0])
    v = verdict(proj, DensityOperator(2, np.outer(ket, ket)), bounds)
    assert v.flags == frozenset() and abs(v.margins["gS_max"]) < 1e-12

    with pytest.raises(ValueError):
        verdict(np.eye(9), singlet, bounds)


def test_ru_choi_never_flagged_not_me(rng):
    for d in (2, 3):
        observables = [random_hermitian(rng, d * d) for _ in range(3)]
        bounds = [bounds_numerical(l, OptimizerConfig(seed=1, restarts=8)) for l in observables]
        bounds.append(bounds_flip(random_complex(rng, d, d), random_complex(rng, d, d)))
        observables.append(None)
        for _ in range(5):
            rho = choi_of_channel(random_ru_channel(d, 3, rng)).state
            for l, b in zip(observables, bounds):
                if l is None:
                    continue
                assert NOT_ME_MIXTURE not in verdict(l, rho, b).flags


def test_detection_helpers(rng):
    a, b = random_hermitian(rng, 3), random_hermitian(rng, 3)
    fa, fb = product_factors(np.kron(a, b))
    assert max_abs_diff(np.kron(fa, fb), np.kron(a, b)) < 1e-10
    assert product_factors(flip_operator(3)) is None
    lam, psi = rank_one_factor(-2 * np.outer(BELL, BELL))
    assert lam == pytest.approx(-2) and abs(abs(np.vdot(psi, BELL)) - 1) < 1e-12
    assert rank_one_factor(np.eye(4)) is None


def test_auto_bounds_dispatch(rng):
    assert auto_bounds(np.outer(BELL, BELL), CFG).method == "closed-form-rank-one"
    assert auto_bounds(np.kron(random_psd(rng, 2), random_psd(rng, 2)), CFG).method == "closed-form-product"
    b = auto_bounds(random_hermitian(rng, 4), CFG)
    assert b.method == "numerical" and "gME_max" in b.spreads
    assert_chain(b)


def test_scale_bounds_negative(rng):
    psi = random_pure(rng, 2)
    b = bounds_rank_one(psi, CFG)
    neg = scale_bounds(b, -2.0)
    assert neg.g_max == -2 * b.g_min and neg.gME_min == -2 * b.gME_max
    assert neg.numerical_fields == ("gME_max",)
    assert_chain(neg)
