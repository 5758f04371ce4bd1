"""Kraus channels, random-unitary / random-projective constructors and the
Choi-Jamiolkowski map.

Channels act on the *second* tensor factor when building the Choi state,
``rho_E = (1 (x) E)(|Phi><Phi|)``.  The stored Choi state is always trace
normalized; the raw trace is kept so the unnormalized operator can be
recovered (it is ``d`` for trace-preserving maps).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    STATE_TOL,
    DensityOperator,
    as_matrix,
    as_vector,
    is_unitary,
    max_abs_diff,
    operator_to_state,
    phi_vector,
    state_to_operator,
)

TAGS = ("general", "ru", "rp")

#: Eigenvalues of the rescaled Choi matrix at or below this are dropped.
KRAUS_EIG_CUTOFF = 1e-12
#: A Kraus operator is rank one when sigma_1 <= RANK_ONE_RATIO * sigma_0.
RANK_ONE_RATIO = 1e-10


class InvalidChannelError(ValueError):
    pass


def _is_rank_one(op: np.ndarray) -> bool:
    s = np.linalg.svd(op, compute_uv=False)
    return s[0] > 0 and (s.size == 1 or s[1] <= RANK_ONE_RATIO * s[0])


def _check_probs(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=float).reshape(-1)
    if np.any(p < 0):
        raise InvalidChannelError(f"negative probability {p.min():g}")
    if abs(p.sum() - 1.0) > STATE_TOL:
        raise InvalidChannelError(f"probabilities sum to {p.sum():.12g}, not 1")
    return p


@dataclass(frozen=True)
class KrausChannel:
    """``E(rho) = sum_j w_j K_j rho K_j^dagger`` with an optional RU/RP tag."""

    d: int
    weights: tuple[float, ...]
    ops: tuple[np.ndarray, ...]
    tag: str = "general"

    def __post_init__(self):
        if self.tag not in TAGS:
            raise InvalidChannelError(f"unknown tag {self.tag!r}")
        weights = tuple(float(w) for w in self.weights)
        ops = []
        for k in self.ops:
            k = as_matrix(k, "Kraus operator").copy()
            if k.shape != (self.d, self.d):
                raise InvalidChannelError(f"Kraus operator has shape {k.shape}, expected {(self.d, self.d)}")
            k.setflags(write=False)
            ops.append(k)
        if len(weights) != len(ops):
            raise InvalidChannelError(f"{len(weights)} weights for {len(ops)} operators")
        if any(w < 0 or not np.isfinite(w) for w in weights):
            raise InvalidChannelError("weights must be finite and non-negative")
        if self.tag in ("ru", "rp"):
            _check_probs(weights)
        if self.tag == "ru":
            for j, k in enumerate(ops):
                if not is_unitary(k):
                    raise InvalidChannelError(f"operator {j} is not unitary")
        if self.tag == "rp":
            for j, k in enumerate(ops):
                if not _is_rank_one(k):
                    raise InvalidChannelError(f"operator {j} is not rank one")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "ops", tuple(ops))

    def __len__(self):
        return len(self.ops)


@dataclass(frozen=True)
class ChoiState:
    state: DensityOperator
    raw_trace: float

    def __post_init__(self):
        if not self.raw_trace > 0:
            raise InvalidChannelError(f"raw trace must be positive, got {self.raw_trace}")

    @property
    def d(self) -> int:
        return self.state.d

    @property
    def matrix(self) -> np.ndarray:
        return self.state.matrix

    def unnormalized(self) -> np.ndarray:
        return self.raw_trace * self.state.matrix


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel(d, (1.0,), (np.eye(d),), "ru")


def depolarizing_channel(d: int) -> KrausChannel:
    """``E(rho) = tr(rho) 1/d`` via the Kraus set ``{|i><j| / sqrt(d)}``."""
    ops = []
    for i in range(d):
        for j in range(d):
            k = np.zeros((d, d), dtype=complex)
            k[i, j] = 1 / np.sqrt(d)
            ops.append(k)
    return KrausChannel(d, (1.0,) * (d * d), tuple(ops))


def apply_channel(ch: KrausChannel, rho, normalize: bool = False) -> np.ndarray:
    rho = as_matrix(rho, "rho")
    if rho.shape != (ch.d, ch.d):
        raise ValueError(f"rho has shape {rho.shape}, channel acts on d={ch.d}")
    out = np.zeros_like(rho)
    for w, k in zip(ch.weights, ch.ops):
        out += w * (k @ rho @ k.conj().T)
    if normalize:
        tr = np.trace(out).real
        if abs(tr) <= STATE_TOL:
            raise ValueError("channel output has zero trace and cannot be normalized")
        out = out / tr
    return out


def channel_action_distance(a: KrausChannel, b: KrausChannel) -> float:
    """Largest elementwise difference of the two actions on all matrix units."""
    if a.d != b.d:
        raise ValueError("channels act on different dimensions")
    d = a.d
    worst = 0.0
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1
            worst = max(worst, max_abs_diff(apply_channel(a, e), apply_channel(b, e)))
    return worst


def choi_matrix(ch: KrausChannel) -> np.ndarray:
    """Unnormalized ``(1 (x) E)(|Phi><Phi|)``."""
    d = ch.d
    out = np.zeros((d * d, d * d), dtype=complex)
    for w, k in zip(ch.weights, ch.ops):
        v = operator_to_state(k)
        out += w * np.outer(v, v.conj())
    return out


def choi_of_channel(ch: KrausChannel) -> ChoiState:
    raw = choi_matrix(ch)
    tr = float(np.trace(raw).real)
    if tr <= STATE_TOL:
        raise InvalidChannelError("channel is identically zero")
    return ChoiState(DensityOperator(ch.d, raw / tr), tr)


def kraus_of_choi(choi: ChoiState) -> KrausChannel:
    """Canonical (orthogonal) Kraus set from the spectral decomposition."""
    lam, vecs = np.linalg.eigh(choi.unnormalized())
    weights, ops = [], []
    for j in np.argsort(lam)[::-1]:
        if lam[j] <= KRAUS_EIG_CUTOFF:
            continue
        weights.append(float(lam[j]))
        ops.append(state_to_operator(vecs[:, j], choi.d))
    return KrausChannel(choi.d, tuple(weights), tuple(ops))


def make_ru(probs: Sequence[float], unitaries: Sequence) -> KrausChannel:
    if len(probs) != len(unitaries):
        raise InvalidChannelError(f"{len(probs)} probabilities for {len(unitaries)} unitaries")
    if not unitaries:
        raise InvalidChannelError("at least one unitary is required")
    ops = [as_matrix(u, "unitary") for u in unitaries]
    p = _check_probs(probs)
    return KrausChannel(ops[0].shape[0], tuple(p), tuple(ops), "ru")


def make_rp(probs: Sequence[float], pairs: Sequence) -> KrausChannel:
    """Random projective channel with ``K_j = |phi_j><psi_j|`` for ``pairs[j] = (phi_j, psi_j)``."""
    if len(probs) != len(pairs):
        raise InvalidChannelError(f"{len(probs)} probabilities for {len(pairs)} vector pairs")
    if not pairs:
        raise InvalidChannelError("at least one term is required")
    p = _check_probs(probs)
    ops = []
    d = None
    for j, (phi, psi) in enumerate(pairs):
        phi = as_vector(phi, "phi")
        psi = as_vector(psi, "psi")
        if d is None:
            d = phi.size
        if phi.size != d or psi.size != d:
            raise InvalidChannelError(f"pair {j} has mismatched dimensions")
        for name, v in (("phi", phi), ("psi", psi)):
            n = np.linalg.norm(v)
            if abs(n - 1) > STATE_TOL:
                raise InvalidChannelError(f"pair {j}: {name} has norm {n:.6g}, expected a unit vector")
        ops.append(np.outer(phi, psi.conj()))
    return KrausChannel(d, tuple(p), tuple(ops), "rp")


def random_ru_channel(d: int, n_terms: int, rng: np.random.Generator) -> KrausChannel:
    from .oracle import haar_unitary

    p = rng.dirichlet(np.ones(n_terms))
    p = p / p.sum()
    return make_ru(p, [haar_unitary(d, rng) for _ in range(n_terms)])


def random_kraus_channel(d: int, n_terms: int, rng: np.random.Generator) -> KrausChannel:
    """Generic (not trace-preserving) CP map with Gaussian Kraus operators."""
    ops = [rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(n_terms)]
    return KrausChannel(d, tuple(rng.uniform(0.1, 1.0, n_terms)), tuple(ops))


def phi_projector(d: int) -> np.ndarray:
    v = phi_vector(d)
    return np.outer(v, v)
