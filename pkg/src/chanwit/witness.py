"""Witness bounds for maximally entangled (ME) mixtures and separable states.

For a Hermitian observable L the six bounds are the spectral range
(``g_min``, ``g_max``), the range over separable states (``gS_*``) and the
range over ME mixtures (``gME_*``).  An expectation value outside the ME
range rules out a random-unitary origin of the state's channel; outside
the separable range it proves entanglement and rules out a
random-projective channel.  The converse never holds: staying inside a
range proves nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    STATE_TOL,
    DensityOperator,
    PureState,
    as_matrix,
    flip_operator,
    is_hermitian,
    local_dim,
    partial_trace,
    partial_transpose,
    state_to_operator,
)
from .oracle import OptimizerConfig, maximize_me, optimize_me, optimize_sep
from .schmidt import MAXIMALLY_ENTANGLED, geometry_profile, norms, schmidt_coefficients, schmidt_decompose

#: Expectation values must clear a bound by more than this to raise a flag.
VERDICT_EPS = 1e-9
#: Unitality deviations above this exclude a random-unitary description.
UNITALITY_TOL = 1e-8

NOT_ME_MIXTURE = "not-ME-mixture"
ENTANGLED = "entangled"

METHODS = ("closed-form-product", "closed-form-flip", "closed-form-rank-one", "numerical")
BOUND_FIELDS = ("g_max", "g_min", "gS_max", "gS_min", "gME_max", "gME_min")


@dataclass(frozen=True)
class WitnessBounds:
    g_max: float
    g_min: float
    gS_max: float
    gS_min: float
    gME_max: float
    gME_min: float
    method: str
    #: fields computed by the oracle rather than in closed form
    numerical_fields: tuple[str, ...] = ()
    #: oracle spread per numerical field, when available
    spreads: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        tol = 1e-7 * (1 + abs(self.g_max) + abs(self.g_min))
        chains = (
            (self.g_min, self.gME_min, self.gME_max, self.g_max),
            (self.g_min, self.gS_min, self.gS_max, self.g_max),
        )
        for chain in chains:
            if any(lo > hi + tol for lo, hi in zip(chain, chain[1:])):
                raise ValueError(f"bounds violate the ordering chain: {self}")

    def as_dict(self) -> dict:
        return {name: float(getattr(self, name)) for name in BOUND_FIELDS}


@dataclass(frozen=True)
class StationarityCertificate:
    gamma: np.ndarray
    residual: float
    value: float


@dataclass(frozen=True)
class Verdict:
    expectation: float
    flags: frozenset
    #: positive margin = distance by which a bound is violated
    margins: dict


def scale_bounds(bounds: WitnessBounds, c: float) -> WitnessBounds:
    """Bounds of ``c * L`` from those of ``L``; a negative factor swaps max and min."""
    if c >= 0:
        vals = {k: c * getattr(bounds, k) for k in BOUND_FIELDS}
        swap = {}
    else:
        vals = {}
        swap = {"g_max": "g_min", "g_min": "g_max", "gS_max": "gS_min",
                "gS_min": "gS_max", "gME_max": "gME_min", "gME_min": "gME_max"}
        for k in BOUND_FIELDS:
            vals[k] = c * getattr(bounds, swap[k])
    numerical = tuple(sorted(swap.get(k, k) for k in bounds.numerical_fields))
    spreads = {swap.get(k, k): v for k, v in bounds.spreads.items()}
    return replace(bounds, **vals, numerical_fields=numerical, spreads=spreads)


def _hermitian_eigvals(m, name: str) -> np.ndarray:
    m = as_matrix(m, name)
    if not is_hermitian(m):
        raise ValueError(f"{name} is not Hermitian")
    return np.linalg.eigvalsh((m + m.conj().T) / 2)


def bounds_product(a, b) -> WitnessBounds:
    """Bounds for ``L = A (x) B`` with A, B Hermitian positive semidefinite."""
    la = _hermitian_eigvals(a, "a")
    lb = _hermitian_eigvals(b, "b")
    if la.size != lb.size:
        raise ValueError("a and b must have the same dimension")
    if la[0] < -STATE_TOL or lb[0] < -STATE_TOL:
        raise ValueError("a and b must be positive semidefinite")
    la = np.clip(la, 0, None)
    lb = np.clip(lb, 0, None)
    d = la.size
    gs_max = float(la[-1] * lb[-1])
    gs_min = float(la[0] * lb[0])
    return WitnessBounds(
        g_max=gs_max,
        g_min=gs_min,
        gS_max=gs_max,
        gS_min=gs_min,
        gME_max=float(la @ lb / d),
        gME_min=float(la @ lb[::-1] / d),
        method="closed-form-product",
    )


def flip_observable(a, b) -> np.ndarray:
    """``L = (A (x) B) F (A (x) B)^dagger`` with F the swap."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ValueError("a and b must be square matrices of equal size")
    ab = np.kron(a, b)
    return ab @ flip_operator(a.shape[0]) @ ab.conj().T


def bounds_flip(a, b) -> WitnessBounds:
    """Bounds for the flip-type observable built from A and B.

    Only the singular values of ``B A^dagger`` enter.  The ME minimum pairs
    neighbouring singular values through a skew-symmetric unitary; in odd
    dimension the unpaired smallest one contributes positively.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ValueError("a and b must be square matrices of equal size")
    d = a.shape[0]
    if d < 2:
        raise ValueError("flip-type bounds need d >= 2: no skew-symmetric unitary exists for d = 1")
    s = np.linalg.svd(b @ a.conj().T, compute_uv=False)
    paired = sum(s[2 * n] * s[2 * n + 1] for n in range(d // 2))
    gme_min = -2 * paired / d
    if d % 2:
        gme_min += s[-1] ** 2 / d
    return WitnessBounds(
        g_max=float(s[0] ** 2),
        g_min=float(-s[0] * s[1]),
        gS_max=float(s[0] ** 2),
        gS_min=0.0,
        gME_max=float(s @ s / d),
        gME_min=float(gme_min),
        method="closed-form-flip",
    )


def bounds_rank_one(psi: PureState, cfg: OptimizerConfig | None = None) -> WitnessBounds:
    """Bounds for the projector ``L = |psi><psi|``.

    ``gME_min`` has no closed form here and comes from the ME oracle.
    """
    sigma = schmidt_decompose(psi).sigma
    n1, _, ninf = norms(sigma)
    values, _, _ = maximize_me(-psi.projector(), cfg or OptimizerConfig())
    gme_min = max(float(-values.max()), 0.0)
    return WitnessBounds(
        g_max=1.0,
        g_min=0.0,
        gS_max=ninf**2,
        gS_min=0.0,
        gME_max=n1**2 / psi.d,
        gME_min=gme_min,
        method="closed-form-rank-one",
        numerical_fields=("gME_min",),
        spreads={"gME_min": float(values.max() - values.min())},
    )


def bounds_numerical(l, cfg: OptimizerConfig | None = None) -> WitnessBounds:
    """All bounds of a general observable; ME and separable ranges from the oracle."""
    cfg = cfg or OptimizerConfig()
    lam = _hermitian_eigvals(l, "observable")
    me = optimize_me(l, cfg)
    sep = optimize_sep(l, cfg)
    g_max, g_min = float(lam[-1]), float(lam[0])
    clip = lambda v: min(max(v, g_min), g_max)  # noqa: E731
    return WitnessBounds(
        g_max=g_max,
        g_min=g_min,
        gS_max=clip(sep.best_value),
        gS_min=clip(sep.worst_value),
        gME_max=clip(me.best_value),
        gME_min=clip(me.worst_value),
        method="numerical",
        numerical_fields=("gS_max", "gS_min", "gME_max", "gME_min"),
        spreads={"gME_max": me.spread, "gS_max": sep.spread},
    )


def unitality_test(rho: DensityOperator) -> tuple[float, float]:
    """Deviation of both reduced states from ``1/d``; (reduced on A, reduced on B)."""
    d = rho.d
    target = np.eye(d) / d
    dev_a = float(np.max(np.abs(partial_trace(rho.matrix, "B", d) - target)))
    dev_b = float(np.max(np.abs(partial_trace(rho.matrix, "A", d) - target)))
    return dev_a, dev_b


def ppt_min_eigenvalue(rho: DensityOperator) -> float:
    """Smallest eigenvalue of the partial transpose; negative means entangled."""
    return float(np.linalg.eigvalsh(partial_transpose(rho.matrix, "B", rho.d))[0])


def white_noise_threshold(psi: PureState) -> float:
    """Smallest admixture p of |psi> above which ``(1-p) 1/d^2 + p |psi><psi|``
    beats both the separable and the ME bound of the projector witness."""
    d = psi.d
    if d < 2:
        raise ValueError("white-noise threshold needs d >= 2")
    n1, _, ninf = norms(schmidt_decompose(psi).sigma)
    return float((d * d * max(n1**2 / d, ninf**2) - 1) / (d * d - 1))


def stationarity_certificate(l, psi_me: PureState) -> StationarityCertificate:
    """Solve ``L|psi> = d (1 (x) Gamma)|psi>`` for Hermitian Gamma in least squares.

    A vanishing residual certifies that ``psi_me`` is a stationary point of
    the ME expectation value; ``value = tr Gamma`` is then its value.
    """
    l = as_matrix(l, "l")
    if not is_hermitian(l):
        raise ValueError("observable is not Hermitian")
    d = psi_me.d
    if l.shape != (d * d, d * d):
        raise ValueError("observable and state dimensions differ")
    if geometry_profile(schmidt_coefficients(psi_me.amplitudes)).classification != MAXIMALLY_ENTANGLED:
        raise ValueError("psi_me is not maximally entangled")
    psi = psi_me.amplitudes
    lpsi = l @ psi
    m = state_to_operator(psi, d)
    n = state_to_operator(lpsi, d)
    # Gamma -> (1 (x) Gamma M)|Phi> is an isometry up to a constant, so the
    # Hermitian least-squares solution is the Hermitian part of the free one
    free = np.linalg.solve(m.T, n.T).T / d
    gamma = (free + free.conj().T) / 2
    residual = float(np.linalg.norm(lpsi - d * np.kron(np.eye(d), gamma) @ psi))
    return StationarityCertificate(gamma, residual, float(np.trace(gamma).real))


def verdict(l, rho: DensityOperator, bounds: WitnessBounds) -> Verdict:
    l = as_matrix(l, "l")
    if l.shape != rho.matrix.shape:
        raise ValueError(f"observable shape {l.shape} does not match state shape {rho.matrix.shape}")
    if not is_hermitian(l):
        raise ValueError("observable is not Hermitian")
    x = float(np.trace(rho.matrix @ l).real)
    margins = {
        "gME_max": x - bounds.gME_max,
        "gME_min": bounds.gME_min - x,
        "gS_max": x - bounds.gS_max,
        "gS_min": bounds.gS_min - x,
    }
    flags = set()
    if margins["gME_max"] > VERDICT_EPS or margins["gME_min"] > VERDICT_EPS:
        flags.add(NOT_ME_MIXTURE)
    if margins["gS_max"] > VERDICT_EPS or margins["gS_min"] > VERDICT_EPS:
        flags.add(ENTANGLED)
    return Verdict(x, frozenset(flags), margins)


# -- observable classification (used by the CLI) ---------------------------


def realign(l, d: int | None = None) -> np.ndarray:
    """``R[(a, a'), (b, b')] = L[(a, b), (a', b')]``; L is a product iff R has rank one."""
    l = as_matrix(l)
    d = d or local_dim(l.shape[0])
    return l.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)


def _hermitian_phase(m: np.ndarray) -> complex:
    i, j = np.unravel_index(int(np.argmax(np.abs(m))), m.shape)
    if i == j:
        return m[i, i] / abs(m[i, i])
    # m = c H with H Hermitian: c^2 = m[i, j] / conj(m[j, i])
    return np.sqrt(m[i, j] / np.conj(m[j, i]))


def product_factors(l, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray] | None:
    """Hermitian A, B with ``L = A (x) B``, or None when L is not a product."""
    l = as_matrix(l)
    d = local_dim(l.shape[0])
    u, s, vh = np.linalg.svd(realign(l, d))
    if s[0] == 0 or (s.size > 1 and s[1] > tol * s[0]):
        return None
    a = u[:, 0].reshape(d, d)
    b = vh[0].reshape(d, d) * s[0]
    c = _hermitian_phase(a)
    a, b = a / c, b * c
    if not (is_hermitian(a, 1e-8) and is_hermitian(b, 1e-8)):
        return None
    a = (a + a.conj().T) / 2
    b = (b + b.conj().T) / 2
    if np.linalg.eigvalsh(a)[-1] <= 0:
        a, b = -a, -b
    return a, b


def rank_one_factor(l, tol: float = 1e-10) -> tuple[float, np.ndarray] | None:
    """``(lambda, psi)`` with ``L = lambda |psi><psi|``, or None."""
    lam, vecs = np.linalg.eigh(as_matrix(l))
    big = np.abs(lam) > tol * max(np.abs(lam).max(), 1e-300)
    if big.sum() != 1:
        return None
    k = int(np.argmax(big))
    return float(lam[k]), vecs[:, k]


def auto_bounds(l, cfg: OptimizerConfig | None = None) -> WitnessBounds:
    """Closed-form bounds where the observable's structure allows, else numerical.

    Detection order: rank one, then PSD product, then general.  Flip-type
    observables are not recognized from L alone; use :func:`bounds_flip`.
    """
    l = as_matrix(l, "observable")
    if not is_hermitian(l):
        raise ValueError("observable is not Hermitian")
    l = (l + l.conj().T) / 2
    r1 = rank_one_factor(l)
    if r1 is not None:
        lam, psi = r1
        return scale_bounds(bounds_rank_one(PureState.from_vector(psi), cfg), lam)
    factors = product_factors(l)
    if factors is not None:
        a, b = factors
        if np.linalg.eigvalsh(a)[0] >= -STATE_TOL and np.linalg.eigvalsh(b)[0] >= -STATE_TOL:
            return bounds_product(a, b)
    return bounds_numerical(l, cfg)
