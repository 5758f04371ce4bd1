"""Dense bipartite linear algebra and the operator/state dictionary.

Bipartite operators live on C^d (x) C^d with the first tensor factor (A)
as the slow index, i.e. ``|a, b> -> a * d + b``.  The unnormalized
maximally entangled vector ``|Phi> = sum_n |n, n>`` is the reference
vector for all operator/state conversions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Absolute tolerance for Hermiticity, positivity and normalization checks.
STATE_TOL = 1e-10


class InvalidStateError(ValueError):
    """A state or operator violates one of its invariants.

    ``invariant`` names the failing condition and ``deviation`` carries the
    measured violation so callers can report it.
    """

    def __init__(self, message: str, invariant: str = "", deviation: float = float("nan")):
        super().__init__(message)
        self.invariant = invariant
        self.deviation = deviation


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a finite 2-D complex array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=complex)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.reshape(-1)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def max_abs_diff(a, b) -> float:
    """Elementwise complex distance used for every equality test."""
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def local_dim(total: int) -> int:
    """Local dimension d for a bipartite space of size ``total = d**2``."""
    d = math.isqrt(int(total))
    if d < 1 or d * d != total:
        raise ValueError(f"size {total} is not a perfect square d**2")
    return d


def hermiticity_deviation(m: np.ndarray) -> float:
    return max_abs_diff(m, m.conj().T)


def is_hermitian(m, tol: float = STATE_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and hermiticity_deviation(m) <= tol


def is_unitary(u, tol: float = STATE_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return max_abs_diff(u.conj().T @ u, np.eye(u.shape[0])) <= tol


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def _square_bipartite(op, d: int | None) -> tuple[np.ndarray, int]:
    op = as_matrix(op, "op")
    if op.shape[0] != op.shape[1]:
        raise ValueError(f"operator must be square, got {op.shape}")
    if d is None:
        d = local_dim(op.shape[0])
    elif op.shape[0] != d * d:
        raise ValueError(f"operator of size {op.shape[0]} does not match d**2 = {d * d}")
    return op, d


def partial_trace(op, subsystem: str, d: int | None = None) -> np.ndarray:
    """Trace out ``subsystem`` ("A" or "B") of a d**2 x d**2 operator."""
    op, d = _square_bipartite(op, d)
    t = op.reshape(d, d, d, d)
    if subsystem.upper() == "A":
        return np.einsum("abac->bc", t)
    if subsystem.upper() == "B":
        return np.einsum("abcb->ac", t)
    raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")


def partial_transpose(op, subsystem: str, d: int | None = None) -> np.ndarray:
    """Transpose only the named tensor factor."""
    op, d = _square_bipartite(op, d)
    t = op.reshape(d, d, d, d)
    if subsystem.upper() == "A":
        t = t.transpose(2, 1, 0, 3)
    elif subsystem.upper() == "B":
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return t.reshape(d * d, d * d)


def phi_vector(d: int) -> np.ndarray:
    """Unnormalized ``|Phi> = sum_n |n, n>``."""
    return np.eye(d, dtype=complex).reshape(-1)


def flip_operator(d: int) -> np.ndarray:
    """Swap operator ``F|x, y> = |y, x>``."""
    return np.eye(d * d, dtype=complex).reshape(d, d, d, d).transpose(0, 1, 3, 2).reshape(d * d, d * d)


def operator_to_state(m, side: str = "right") -> np.ndarray:
    """Vector ``(1 (x) M)|Phi>`` (``side="right"``) or ``(M^T (x) 1)|Phi>``.

    Both sides give the same vector; the amplitude of ``|n, k>`` is ``M[k, n]``.
    """
    m = as_matrix(m, "m")
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"m must be square, got {m.shape}")
    if side == "right":
        return m.T.reshape(-1).copy()
    if side == "left":
        d = m.shape[0]
        return np.kron(m.T, np.eye(d)) @ phi_vector(d)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def state_to_operator(psi, d: int | None = None) -> np.ndarray:
    """Inverse of :func:`operator_to_state` with ``side="right"``."""
    psi = as_vector(psi, "psi")
    if d is None:
        d = local_dim(psi.size)
    elif psi.size != d * d:
        raise ValueError(f"vector of length {psi.size} does not match d**2 = {d * d}")
    return psi.reshape(d, d).T.copy()


@dataclass(frozen=True)
class PureState:
    """Normalized vector on C^d (x) C^d."""

    d: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = as_vector(self.amplitudes, "amplitudes")
        if amp.size != self.d * self.d:
            raise InvalidStateError(
                f"expected {self.d * self.d} amplitudes, got {amp.size}", "dimension", float(amp.size)
            )
        norm = float(np.linalg.norm(amp))
        if abs(norm - 1.0) > STATE_TOL:
            raise InvalidStateError(
                f"norm {norm:.6g} exceeds tolerance {STATE_TOL:g}", "unit-norm", abs(norm - 1.0)
            )
        amp = amp.copy()
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def from_vector(cls, psi) -> "PureState":
        psi = as_vector(psi, "psi")
        return cls(local_dim(psi.size), psi)

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def operator(self) -> np.ndarray:
        """Matrix M with ``|psi> = (1 (x) M)|Phi>``."""
        return state_to_operator(self.amplitudes, self.d)


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, positive semidefinite, unit-trace d**2 x d**2 matrix."""

    d: int
    matrix: np.ndarray

    def __post_init__(self):
        m, _ = _square_bipartite(self.matrix, self.d)
        herm = hermiticity_deviation(m)
        if herm > STATE_TOL:
            raise InvalidStateError(f"hermiticity deviation {herm:.3g} exceeds tolerance", "hermitian", herm)
        m = (m + m.conj().T) / 2
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > STATE_TOL:
            raise InvalidStateError(f"trace {tr:.6g} differs from 1", "unit-trace", abs(tr - 1.0))
        lam_min = float(np.linalg.eigvalsh(m)[0])
        if lam_min < -STATE_TOL:
            raise InvalidStateError(f"minimum eigenvalue {lam_min:.3g} is negative", "psd", -lam_min)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, m) -> "DensityOperator":
        m = as_matrix(m)
        return cls(local_dim(m.shape[0]), m)

    @classmethod
    def from_pure(cls, psi: PureState) -> "DensityOperator":
        return cls(psi.d, psi.projector())
