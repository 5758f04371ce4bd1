"""Schmidt and complementary Schmidt decompositions, norm geometry of the
Schmidt vector, and the maximally entangled Fourier basis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import STATE_TOL, PureState, as_vector, state_to_operator

#: Tolerance for the separable / maximally entangled classification.
CLASS_TOL = 1e-8
#: Phases are pinned to zero below this magnitude.
PHASE_CUTOFF = 1e-12

SEPARABLE = "separable-pure"
MAXIMALLY_ENTANGLED = "maximally-entangled"
INTERMEDIATE = "intermediate"


@dataclass(frozen=True)
class SchmidtData:
    """``|psi> = sum_n sigma[n] |e_n> (x) |f_n>``, e_n and f_n the columns of
    ``basis_a`` and ``basis_b``."""

    sigma: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray

    @property
    def d(self) -> int:
        return self.sigma.size

    def reconstruct(self) -> np.ndarray:
        return np.einsum("n,an,bn->ab", self.sigma, self.basis_a, self.basis_b).reshape(-1)


@dataclass(frozen=True)
class ComplementarySchmidtData:
    """Expansion ``sum_k tau[k] |F_k>`` over orthonormal ME states.

    ``me_states[k]`` is ``|F_k>`` in the Schmidt frame, where the state reads
    ``sum_n sigma_n |n, n>``; :meth:`original_frame_states` maps them back
    with the local Schmidt bases.
    """

    tau: np.ndarray
    theta: np.ndarray
    sigma: np.ndarray
    me_states: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray

    @property
    def d(self) -> int:
        return self.tau.size

    def reconstruct(self) -> np.ndarray:
        """The state in the Schmidt frame."""
        return self.tau @ self.me_states

    def original_frame_states(self) -> np.ndarray:
        rot = np.kron(self.basis_a, self.basis_b)
        return (rot @ self.me_states.T).T


@dataclass(frozen=True)
class GeometryProfile:
    norm1: float
    norm2: float
    norm_inf: float
    classification: str


def _phase_of_largest(v: np.ndarray) -> complex:
    k = int(np.argmax(np.abs(v)))
    return v[k] / abs(v[k]) if abs(v[k]) > 0 else 1.0


def schmidt_decompose(psi: PureState) -> SchmidtData:
    # psi[a * d + b] = C[a, b] = sum_n s_n W[a, n] Vh[n, b]
    d = psi.d
    c = state_to_operator(psi.amplitudes, d).T
    w, s, vh = np.linalg.svd(c)
    e = w.copy()
    f = vh.T.copy()
    for n in range(d):
        ph = _phase_of_largest(e[:, n])
        e[:, n] /= ph
        f[:, n] *= ph
    # ties in sigma broken by where the local vector lives, so degenerate
    # spectra still give a reproducible ordering
    lead = [int(np.argmax(np.abs(e[:, n]))) for n in range(d)]
    order = sorted(range(d), key=lambda n: (-round(float(s[n]), 12), lead[n], n))
    return SchmidtData(s[order].copy(), e[:, order], f[:, order])


def schmidt_coefficients(psi) -> np.ndarray:
    """Schmidt vector of a raw amplitude vector (no normalization check)."""
    v = as_vector(psi, "psi")
    return np.linalg.svd(state_to_operator(v).T, compute_uv=False)


def dft_matrix(d: int) -> np.ndarray:
    """Unitary DFT ``F[m, n] = omega^(m n) / sqrt(d)`` with ``omega = exp(2 pi i / d)``."""
    k = np.arange(d)
    return np.exp(2j * np.pi * np.outer(k, k) / d) / np.sqrt(d)


def gdft(sigma, d: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Generalized DFT: ``tau_k = exp(i theta_k) (F sigma)_k`` with phases chosen
    so that ``tau_k >= 0``."""
    sigma = np.asarray(sigma, dtype=float).reshape(-1)
    if d is not None and sigma.size != d:
        raise ValueError(f"sigma has length {sigma.size}, expected {d}")
    if np.any(sigma < 0):
        raise ValueError("gdft is defined for non-negative coefficient vectors")
    c = dft_matrix(sigma.size) @ sigma
    tau = np.abs(c)
    theta = np.where(tau > PHASE_CUTOFF, -np.angle(c), 0.0)
    return tau, theta


def inverse_gdft(tau, theta) -> np.ndarray:
    """Undo :func:`gdft`; returns a complex vector (real up to rounding for valid input)."""
    tau = np.asarray(tau, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return dft_matrix(tau.size).conj().T @ (np.exp(-1j * theta) * tau)


def complementary_decompose(psi: PureState) -> ComplementarySchmidtData:
    sd = schmidt_decompose(psi)
    d = sd.d
    tau, theta = gdft(sd.sigma)
    n = np.arange(d)
    # phases phi_{k,n} = -2 pi k n / d - theta_k of the diagonal unitaries U_k
    phases = -2 * np.pi * np.outer(n, n) / d - theta[:, None]
    states = np.zeros((d, d * d), dtype=complex)
    states[:, n * d + n] = np.exp(1j * phases) / np.sqrt(d)
    return ComplementarySchmidtData(tau, theta, sd.sigma, states, sd.basis_a, sd.basis_b)


def norms(sigma) -> tuple[float, float, float]:
    s = np.abs(np.asarray(sigma, dtype=complex).reshape(-1))
    return float(s.sum()), float(np.sqrt(s @ s)), float(s.max())


def geometry_profile(sigma) -> GeometryProfile:
    sigma = np.asarray(sigma, dtype=float).reshape(-1)
    n1, n2, ninf = norms(sigma)
    if abs(n2 - 1) > STATE_TOL:
        raise ValueError(f"Schmidt vector has 2-norm {n2:.12g}, expected 1")
    if abs(n1 - 1) <= CLASS_TOL:
        cls = SEPARABLE
    elif abs(np.sqrt(sigma.size) * ninf - 1) <= CLASS_TOL:
        cls = MAXIMALLY_ENTANGLED
    else:
        cls = INTERMEDIATE
    return GeometryProfile(n1, n2, ninf, cls)


def is_maximally_entangled(psi, tol: float = CLASS_TOL) -> bool:
    s = schmidt_coefficients(psi)
    return bool(np.max(np.abs(s - 1 / np.sqrt(s.size))) <= tol)


def clock_shift(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Clock ``U = diag(omega^q)`` and shift ``V|q> = |q+1 mod d>``."""
    omega = np.exp(2j * np.pi / d)
    clock = np.diag(omega ** np.arange(d))
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    return clock, shift


def fourier_me_basis(d: int) -> np.ndarray:
    """All ``|F_{m,n}>`` as rows, row index ``m * d + n``.

    ``|F_{m,n}> = d^{-1/2} sum_q omega^{q m} |q, q + n mod d>``.
    """
    if d < 1:
        raise ValueError("d must be positive")
    omega = np.exp(2j * np.pi / d)
    q = np.arange(d)
    out = np.zeros((d * d, d * d), dtype=complex)
    for m in range(d):
        for n in range(d):
            out[m * d + n, q * d + (q + n) % d] = omega ** (q * m) / np.sqrt(d)
    return out
