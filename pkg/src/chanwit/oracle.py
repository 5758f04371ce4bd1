"""Brute-force ground truth for the closed-form witness bounds.

Two independent optimizers:

* :func:`optimize_me` searches pure maximally entangled states
  ``(1 (x) U)|Phi>/sqrt(d)`` by ascent on the unitary group.
* :func:`optimize_sep` runs the alternating separability eigenvalue
  iteration over product vectors ``|a, b>``.

Both run ``cfg.restarts`` independent starts; restart ``j`` is seeded with
``cfg.seed + j`` so results do not depend on execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .core import as_matrix, is_hermitian, is_unitary, local_dim

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class OptimizerConfig:
    seed: int = 0
    restarts: int = 32
    max_iters: int = 500
    step_tol: float = 1e-10

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("restarts and max_iters must be positive")
        if not self.step_tol > 0:
            raise ValueError("step_tol must be positive")

    def rng(self, index: int = 0) -> np.random.Generator:
        return np.random.default_rng((int(self.seed) + index) % 2**64)


@dataclass(frozen=True)
class OptResult:
    """Extremes of an objective found over all restarts.

    ``argmax``/``argmin`` hold the optimal unitary ``U`` for ME searches and
    the pair ``(a, b)`` for separable searches.  ``spread`` is the range of
    the per-restart maxima; a large spread hints that more restarts are
    needed.
    """

    best_value: float
    worst_value: float
    argmax: object
    argmin: object
    spread: float
    restart_values: tuple[float, ...] = field(default=(), repr=False)
    converged: int = 0


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix with the
    phases of ``diag(R)`` moved into ``Q``."""
    if d < 1:
        raise ValueError("d must be positive")
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_unitary(d: int, seed: int) -> np.ndarray:
    return haar_unitary(d, np.random.default_rng(seed))


def random_unit_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def _check_observable(l) -> tuple[np.ndarray, int]:
    l = as_matrix(l, "observable")
    if not is_hermitian(l):
        raise ValueError("observable must be Hermitian")
    return (l + l.conj().T) / 2, local_dim(l.shape[0])


# -- maximally entangled states ---------------------------------------------


@lru_cache(maxsize=None)
def hermitian_basis(d: int) -> np.ndarray:
    """Frobenius-orthonormal basis of the d x d Hermitian matrices, shape (d*d, d, d)."""
    out = []
    for i in range(d):
        t = np.zeros((d, d), dtype=complex)
        t[i, i] = 1
        out.append(t)
    for i in range(d):
        for j in range(i + 1, d):
            t = np.zeros((d, d), dtype=complex)
            t[i, j] = t[j, i] = 1 / np.sqrt(2)
            out.append(t)
            t = np.zeros((d, d), dtype=complex)
            t[i, j], t[j, i] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            out.append(t)
    basis = np.array(out)
    basis.setflags(write=False)
    return basis


def me_state(u) -> np.ndarray:
    """Normalized ``(1 (x) U)|Phi>/sqrt(d)``."""
    u = np.asarray(u)
    return u.T.reshape(-1) / np.sqrt(u.shape[0])


def me_value(l, u) -> float:
    """``(1/d) <Phi|(1 (x) U^dagger) L (1 (x) U)|Phi>``."""
    psi = me_state(u)
    return float(np.vdot(psi, np.asarray(l) @ psi).real)


def _me_local_model(l: np.ndarray, u: np.ndarray, basis: np.ndarray):
    """Value, Riemannian gradient and Hessian of ``t -> f(U exp(i sum_k t_k T_k))`` at 0."""
    d = u.shape[0]
    sd = np.sqrt(d)
    psi = me_state(u)
    lpsi = l @ psi
    f = float(np.vdot(psi, lpsi).real)
    # L|psi> = (1 (x) N)|Phi>; K = N^dagger U
    k = lpsi.reshape(d, d).conj() @ u
    grad = -2 * np.einsum("ij,kji->k", k, basis).imag / sd
    first = np.einsum("ij,kjl->kli", u, 1j * basis).reshape(len(basis), -1).T / sd
    hess = (first.conj().T @ l @ first).real
    kt = np.einsum("ij,kjl->kil", k, basis)
    tr = np.einsum("kil,mli->km", kt, basis).real
    hess = hess - (tr + tr.T) / (2 * sd)
    return f, grad, hess


def _exp_i(h: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T


def me_gradient(l, u) -> np.ndarray:
    """Hermitian ascent direction G with ``d/dt f(U exp(itH)) = tr(G H)`` at t = 0."""
    l = np.asarray(l)
    u = np.asarray(u)
    d = u.shape[0]
    k = (l @ me_state(u)).reshape(d, d).conj() @ u
    return 1j * (k - k.conj().T) / np.sqrt(d)


def _ascend_me(l: np.ndarray, u: np.ndarray, cfg: OptimizerConfig) -> tuple[np.ndarray, float, bool]:
    basis = hermitian_basis(u.shape[0])
    f, g, hess = _me_local_model(l, u, basis)
    for _ in range(cfg.max_iters):
        gnorm = np.linalg.norm(g)
        if gnorm < cfg.step_tol:
            return u, f, True
        # saddle-free Newton: curvature magnitudes, flat directions dropped
        mu, vecs = np.linalg.eigh(2 * hess)
        scale = np.abs(mu)
        keep = scale > 1e-12 * max(1.0, scale.max())
        step = vecs[:, keep] @ ((vecs[:, keep].T @ g) / scale[keep])
        if not keep.any() or step @ g <= 0:
            step = g.copy()
        norm = np.linalg.norm(step)
        if norm > 1.0:
            step /= norm
        slope = float(step @ g)
        direction = np.einsum("k,kij->ij", step, basis)
        t = 1.0
        for _ in range(60):
            u_new = u @ _exp_i(t * direction)
            f_new, g_new, h_new = _me_local_model(l, u_new, basis)
            if f_new >= f + 1e-4 * t * slope:
                break
            # below roundoff the value is flat; progress is judged by the gradient
            if f_new >= f - 8 * _EPS * (1 + abs(f)) and np.linalg.norm(g_new) < gnorm:
                break
            t /= 2
        else:
            return u, f, False
        u, f, g, hess = u_new, f_new, g_new, h_new
    return u, f, bool(np.linalg.norm(g) < cfg.step_tol)


def maximize_me(l, cfg: OptimizerConfig | None = None) -> tuple[np.ndarray, np.ndarray, int]:
    """Per-restart local maxima of the ME objective: (values, unitaries, converged count)."""
    cfg = cfg or OptimizerConfig()
    l, d = _check_observable(l)
    values, unitaries, converged = [], [], 0
    for j in range(cfg.restarts):
        u, f, ok = _ascend_me(l, haar_unitary(d, cfg.rng(j)), cfg)
        values.append(f)
        unitaries.append(u)
        converged += ok
    return np.array(values), np.array(unitaries), converged


def optimize_me(l, cfg: OptimizerConfig | None = None) -> OptResult:
    """Maximum and minimum of ``<psi|L|psi>`` over pure ME states."""
    cfg = cfg or OptimizerConfig()
    l, _ = _check_observable(l)
    vmax, umax, cmax = maximize_me(l, cfg)
    vmin, umin, cmin = maximize_me(-l, cfg)
    i, j = int(np.argmax(vmax)), int(np.argmax(vmin))
    return OptResult(
        best_value=float(vmax[i]),
        worst_value=float(-vmin[j]),
        argmax=umax[i],
        argmin=umin[j],
        spread=float(vmax.max() - vmax.min()),
        restart_values=tuple(float(v) for v in vmax),
        converged=cmax + cmin,
    )


# -- separable states --------------------------------------------------------


def reduced_on_a(l: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``L_b = tr_B[L (1 (x) |b><b|)]``."""
    d = b.size
    return np.einsum("ijkl,j,l->ik", l.reshape(d, d, d, d), b.conj(), b)


def reduced_on_b(l: np.ndarray, a: np.ndarray) -> np.ndarray:
    """``L_a = tr_A[L (|a><a| (x) 1)]``."""
    d = a.size
    return np.einsum("ijkl,i,k->jl", l.reshape(d, d, d, d), a.conj(), a)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def _extremal_vector(m: np.ndarray, top: bool) -> tuple[float, np.ndarray]:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    k = -1 if top else 0
    return float(w[k]), _fix_phase(v[:, k])


def separability_residual(l, a, b) -> float:
    """Largest residual of the two coupled separability eigenvalue equations."""
    l = np.asarray(l)
    a = np.asarray(a)
    b = np.asarray(b)
    g = float(np.vdot(np.kron(a, b), l @ np.kron(a, b)).real)
    ra = np.linalg.norm(reduced_on_a(l, b) @ a - g * a)
    rb = np.linalg.norm(reduced_on_b(l, a) @ b - g * b)
    return float(max(ra, rb))


def _alternate_sep(l: np.ndarray, b: np.ndarray, top: bool, cfg: OptimizerConfig):
    g_old = np.inf
    a = None
    for _ in range(cfg.max_iters):
        _, a = _extremal_vector(reduced_on_a(l, b), top)
        g, b = _extremal_vector(reduced_on_b(l, a), top)
        if abs(g - g_old) < cfg.step_tol and separability_residual(l, a, b) < 1e-9:
            return g, a, b, True
        g_old = g
    return g, a, b, False


def optimize_sep(l, cfg: OptimizerConfig | None = None) -> OptResult:
    """Maximum and minimum of ``<a, b|L|a, b>`` over product vectors."""
    cfg = cfg or OptimizerConfig()
    l, d = _check_observable(l)
    tops, bottoms, converged = [], [], 0
    for j in range(cfg.restarts):
        b0 = random_unit_vector(d, cfg.rng(j))
        for top, store in ((True, tops), (False, bottoms)):
            g, a, b, ok = _alternate_sep(l, b0, top, cfg)
            store.append((g, a, b))
            converged += ok
    vmax = np.array([t[0] for t in tops])
    vmin = np.array([t[0] for t in bottoms])
    i, k = int(np.argmax(vmax)), int(np.argmin(vmin))
    return OptResult(
        best_value=float(vmax[i]),
        worst_value=float(vmin[k]),
        argmax=(tops[i][1], tops[i][2]),
        argmin=(bottoms[k][1], bottoms[k][2]),
        spread=float(vmax.max() - vmax.min()),
        restart_values=tuple(float(v) for v in vmax),
        converged=converged,
    )


# -- generalized Chebyshev sum inequality ----------------------------------


class ChebyshevResult(NamedTuple):
    lhs: float
    rhs: float
    lower: float
    holds: bool


def chebyshev_check(a, b, u, tol: float = 1e-12) -> ChebyshevResult:
    """Check ``sum_i a_i b_{d-1-i} <= sum_ij |U_ij|^2 a_i b_j <= sum_i a_i b_i``.

    ``a`` and ``b`` must be sorted ascending.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    u = as_matrix(u, "u")
    if a.shape != b.shape or a.ndim != 1 or u.shape != (a.size, a.size):
        raise ValueError("a, b and u have incompatible shapes")
    if np.any(np.diff(a) < 0) or np.any(np.diff(b) < 0):
        raise ValueError("a and b must be sorted in ascending order")
    if not is_unitary(u):
        raise ValueError("u is not unitary")
    g = np.abs(u) ** 2
    lhs = float(a @ g @ b)
    rhs = float(a @ b)
    lower = float(a @ b[::-1])
    return ChebyshevResult(lhs, rhs, lower, lhs <= rhs + tol and lower <= lhs + tol)
