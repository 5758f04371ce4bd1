import numpy as np
import pytest

from chanwit.core import flip_operator, is_unitary, max_abs_diff
from chanwit.oracle import (
    OptimizerConfig,
    chebyshev_check,
    haar_unitary,
    me_gradient,
    me_value,
    optimize_me,
    optimize_sep,
    random_unitary,
    separability_residual,
)

from conftest import BELL, random_hermitian

CFG = OptimizerConfig(seed=7, restarts=12)


def test_random_unitary_examples():
    for d in (1, 2, 5, 8):
        u = random_unitary(d, 11)
        assert max_abs_diff(u.conj().T @ u, np.eye(d)) < 1e-12
    assert np.array_equal(random_unitary(4, 99), random_unitary(4, 99))
    rng = np.random.default_rng(0)
    moment = np.mean([abs(haar_unitary(2, rng)[0, 0]) ** 2 for _ in range(10_000)])
    assert abs(moment - 0.5) < 0.02


def test_haar_phase_correction():
    # without the phase fix the diagonal of R would be positive but the
    # distribution of diag(Q) phases biased; check the fourth moment too
    rng = np.random.default_rng(1)
    d = 3
    samples = np.array([haar_unitary(d, rng)[0, 0] for _ in range(20_000)])
    assert abs(np.mean(np.abs(samples) ** 4) - 2 / (d * (d + 1))) < 0.01
    assert abs(np.mean(samples)) < 0.02


def test_me_gradient_matches_finite_difference(rng):
    d = 3
    l = random_hermitian(rng, d * d)
    u = haar_unitary(d, rng)
    g = me_gradient(l, u)
    h = random_hermitian(rng, d)
    w, v = np.linalg.eigh(h)
    step = 1e-6
    plus = u @ (v * np.exp(1j * step * w)) @ v.conj().T
    minus = u @ (v * np.exp(-1j * step * w)) @ v.conj().T
    fd = (me_value(l, plus) - me_value(l, minus)) / (2 * step)
    assert abs(fd - np.trace(g @ h).real) < 1e-7


def test_optimize_me_examples():
    r = optimize_me(np.eye(4), CFG)
    assert abs(r.best_value - 1) < 1e-12 and abs(r.worst_value - 1) < 1e-12
    p = np.diag([0.0, 1.0])
    r = optimize_me(np.kron(p, p), CFG)
    assert abs(r.best_value - 0.5) < 1e-6 and abs(r.worst_value) < 1e-6
    r = optimize_me(flip_operator(3), CFG)
    assert abs(r.worst_value + 1 / 3) < 1e-6
    assert is_unitary(r.argmax, 1e-10) and is_unitary(r.argmin, 1e-10)


@pytest.mark.parametrize("d", [2, 3])
def test_optimize_me_dominates_sampling(d, rng):
    l = random_hermitian(rng, d * d)
    r = optimize_me(l, CFG)
    sampled = [me_value(l, haar_unitary(d, rng)) for _ in range(3000)]
    assert r.best_value >= max(sampled) - 1e-12
    assert r.worst_value <= min(sampled) + 1e-12
    assert r.worst_value <= r.best_value


def test_optimize_sep_examples():
    r = optimize_sep(np.eye(4), CFG)
    assert abs(r.best_value - 1) < 1e-12
    r = optimize_sep(np.outer(BELL, BELL), CFG)
    assert abs(r.best_value - 0.5) < 1e-8
    r = optimize_sep(np.kron(np.diag([1.0, 2.0]), np.diag([3.0, 4.0])), CFG)
    assert abs(r.best_value - 8) < 1e-8 and abs(r.worst_value - 3) < 1e-8


@pytest.mark.parametrize("d", [2, 3, 4])
def test_optimize_sep_stationary_pairs(d, rng):
    l = random_hermitian(rng, d * d)
    r = optimize_sep(l, CFG)
    for a, b in (r.argmax, r.argmin):
        assert separability_residual(l, a, b) < 1e-8
    sampled = []
    for _ in range(2000):
        a = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        b = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        v = np.kron(a / np.linalg.norm(a), b / np.linalg.norm(b))
        sampled.append(np.vdot(v, l @ v).real)
    assert r.best_value >= max(sampled) - 1e-12
    assert r.worst_value <= min(sampled) + 1e-12


def test_optimizers_are_deterministic(rng):
    l = random_hermitian(rng, 9)
    cfg = OptimizerConfig(seed=123, restarts=5)
    for run in (optimize_me, optimize_sep):
        a, b = run(l, cfg), run(l, cfg)
        assert a.best_value == b.best_value and a.worst_value == b.worst_value
        assert a.restart_values == b.restart_values


def test_optimizers_reject_non_hermitian():
    m = np.zeros((4, 4))
    m[0, 1] = 1
    with pytest.raises(ValueError):
        optimize_me(m)
    with pytest.raises(ValueError):
        optimize_sep(m)


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(restarts=0)
    with pytest.raises(ValueError):
        OptimizerConfig(seed=-1)


def test_chebyshev_examples(rng):
    a = np.sort(rng.uniform(size=4))
    b = np.sort(rng.uniform(size=4))
    r = chebyshev_check(a, b, np.eye(4))
    assert r.lhs == pytest.approx(r.rhs, abs=1e-15) and r.holds
    rev = np.eye(4)[::-1]
    r = chebyshev_check(a, b, rev)
    assert abs(r.lhs - a @ b[::-1]) < 1e-15 and r.holds
    for _ in range(1000):
        assert chebyshev_check(a, b, haar_unitary(4, rng)).holds


def test_chebyshev_validation():
    with pytest.raises(ValueError, match="sorted"):
        chebyshev_check([2, 1], [0, 1], np.eye(2))
    with pytest.raises(ValueError, match="unitary"):
        chebyshev_check([0, 1], [0, 1], np.diag([1, 2]))
