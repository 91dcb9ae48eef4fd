"""Quantum Renyi-type divergences, all in bits.

Conventions shared by every function here:

* ``rho`` and ``sigma`` may be :class:`~qrenyi.linalg.HermitianOperator`
  instances or plain arrays; arrays are certified on entry (``rho`` as a
  density operator, ``sigma`` as PSD).
* Supports are decided with a relative eigenvalue threshold ``rank_tol``.
* Powers of singular operators are pseudo-powers on the support.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import logsumexp

from qrenyi.errors import InvalidAlpha, NumericalFailure
from qrenyi.linalg import (
    DEFAULT_RANK_TOL,
    DensityOperator,
    HermitianOperator,
    PsdOperator,
    eig_hermitian,
    loewner_leq,
    matrix_power_psd,
    support_mask,
    support_projector,
    trace_norm,
)

LN2 = math.log(2.0)

# Gap (natural log units of the scaling weights) beyond which blocks of a
# graded matrix are decoupled; the neglected coupling is O(exp(-GAP / 2)).
_GRADING_GAP = 60.0
# Projector distance below which one support is taken to contain another.
_CONTAIN_TOL = 1e-7

__all__ = [
    "DivergenceValue",
    "HypothesisTest",
    "SupportRelation",
    "support_relation",
    "sandwiched_renyi",
    "alpha_relative_renyi",
    "relative_entropy",
    "d_min",
    "d_max",
    "d0",
    "hypothesis_testing",
]

AlphaTag = Union[float, str]


class SupportRelation(str, enum.Enum):
    EQUAL = "equal"
    RHO_INSIDE_SIGMA = "rho_inside_sigma"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class DivergenceValue:
    """A divergence in bits; ``value`` may be ``math.inf``.

    ``alpha`` is the order for the Renyi families, or one of the tags
    ``"zero-limit"``, ``"one-limit"``, ``"infinity-limit"``, ``"min"``,
    ``"max"``, ``"hypothesis"``.
    """

    value: float
    alpha: AlphaTag
    support_relation: SupportRelation
    base: int = 2

    @property
    def beta(self) -> float | None:
        """The sandwich exponent (1 - alpha) / (2 alpha), for numeric alpha."""
        if isinstance(self.alpha, str) or self.alpha == 0:
            return None
        return (1.0 - self.alpha) / (2.0 * self.alpha)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class HypothesisTest:
    """Optimal test ``0 <= A <= I`` for rho against sigma with type-I error at most epsilon."""

    test_operator: HermitianOperator
    type1_error: float
    type2_error: float
    epsilon: float
    value: float

    def __float__(self):
        return float(self.value)


def _density(rho) -> DensityOperator:
    return rho if isinstance(rho, DensityOperator) else DensityOperator(rho)


def _psd(sigma) -> PsdOperator:
    return sigma if isinstance(sigma, PsdOperator) else PsdOperator(sigma)


def _contained(p_inner: np.ndarray, p_outer: np.ndarray) -> bool:
    # ||P_in - P_out P_in|| small  <=>  range(P_in) inside range(P_out)
    leak = p_inner - p_outer @ p_inner
    return float(np.abs(leak).max(initial=0.0)) <= _CONTAIN_TOL


def support_relation(rho, sigma, rank_tol: float = DEFAULT_RANK_TOL) -> SupportRelation:
    """Classify supp rho against supp sigma by rank and mutual containment."""
    p_rho = support_projector(_psd(rho), rank_tol)
    p_sig = support_projector(_psd(sigma), rank_tol)
    if not _contained(p_rho.data, p_sig.data):
        return SupportRelation.INCOMPARABLE
    if p_rho.rank == p_sig.rank and _contained(p_sig.data, p_rho.data):
        return SupportRelation.EQUAL
    return SupportRelation.RHO_INSIDE_SIGMA


def _check_alpha(alpha: float, allow_zero: bool = False) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha < 0 or alpha == 1.0 or (alpha == 0.0 and not allow_zero):
        raise InvalidAlpha(f"alpha={alpha!r} is outside the domain")
    return alpha


def graded_log_eigenvalues(a: np.ndarray, weights: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Natural logs of the nonzero eigenvalues of ``D a D``, ``D = diag(exp(weights / 2))``.

    ``a`` is PSD and moderately scaled; ``weights`` may spread over thousands of
    units, far beyond double range, so ``D`` is never formed.  Indices are
    ordered by decreasing weight and cut into blocks wherever consecutive
    weights differ by more than ``_GRADING_GAP``.  Block elimination of ``a``
    then gives a congruence ``D a D = L' diag(D_k S_k D_k) L'^H`` with ``L'``
    within O(exp(-gap / 2)) of the identity, so the eigenvalues are those of
    the scaled Schur complements up to that relative error.  Zero eigenvalues
    are decided on ``a``'s own scale, never on the graded one.
    """
    order = np.argsort(-weights, kind="stable")
    w = weights[order]
    t = a[np.ix_(order, order)]
    lam_a = eig_hermitian(t).eigenvalues
    scale = lam_a[0] if lam_a.size else 0.0
    if scale <= 0.0:
        return np.empty(0)
    cuts = [0] + [i + 1 for i in range(len(w) - 1) if w[i] - w[i + 1] > _GRADING_GAP] + [len(w)]
    logs = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        k = hi - lo
        block = t[:k, :k]
        spec = eig_hermitian(block)
        keep = spec.eigenvalues > rank_tol * scale
        r = int(keep.sum())
        if r:
            top = w[lo]
            d = np.exp(0.5 * (w[lo:hi] - top))
            if r == k:
                # full rank: Jacobi on D S D keeps relative accuracy
                mu = eig_hermitian(d[:, None] * block * d[None, :]).eigenvalues
            else:
                f = spec.eigenvectors[:, keep] * np.sqrt(spec.eigenvalues[keep])
                g = d[:, None] * f
                mu = eig_hermitian(g.conj().T @ g).eigenvalues
            mu = np.maximum(mu, np.finfo(float).tiny * max(mu[0], np.finfo(float).tiny))
            logs.append(np.log(mu) + top)
        if hi < len(w):
            lam = spec.eigenvalues[keep]
            v = spec.eigenvectors[:, keep]
            pinv = (v / lam) @ v.conj().T
            rest = t[k:, k:] - t[k:, :k] @ pinv @ t[:k, k:]
            t = 0.5 * (rest + rest.conj().T)
    return np.concatenate(logs) if logs else np.empty(0)


def log_trace_sandwich(rho: DensityOperator, sigma: PsdOperator, alpha: float, rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """Natural log of tr[(sigma^b rho sigma^b)^alpha], b = (1 - alpha) / (2 alpha).

    Works in the eigenbasis of sigma restricted to its support; returns
    ``-inf`` when the trace vanishes.
    """
    beta = (1.0 - alpha) / (2.0 * alpha)
    s = sigma.clipped_eigenvalues
    mask = support_mask(s, rank_tol)
    if not mask.any():
        return -math.inf
    v = sigma.spectrum.eigenvectors[:, mask]
    a = v.conj().T @ rho.data @ v
    a = 0.5 * (a + a.conj().T)
    weights = 2.0 * beta * np.log(s[mask])
    logs = graded_log_eigenvalues(a, weights, rank_tol)
    if logs.size == 0:
        return -math.inf
    return float(logsumexp(alpha * logs))


def sandwiched_renyi(rho, sigma, alpha: float, rank_tol: float = DEFAULT_RANK_TOL) -> DivergenceValue:
    """Sandwiched Renyi divergence of order ``alpha`` in bits.

    For ``alpha > 1`` the value is infinite unless supp rho lies inside supp
    sigma; for ``alpha < 1`` orthogonal supports give +inf as well.
    """
    alpha = _check_alpha(alpha)
    rho, sigma = _density(rho), _psd(sigma)
    rel = support_relation(rho, sigma, rank_tol)
    if alpha > 1 and rel is SupportRelation.INCOMPARABLE:
        return DivergenceValue(math.inf, alpha, rel)
    lt = log_trace_sandwich(rho, sigma, alpha, rank_tol)
    value = math.inf if lt == -math.inf else lt / ((alpha - 1.0) * LN2)
    return DivergenceValue(value, alpha, rel)


def _overlaps(rho: PsdOperator, sigma: PsdOperator):
    """Eigenvalues of both operators and |<phi_i|psi_j>|^2."""
    w = rho.spectrum.eigenvectors.conj().T @ sigma.spectrum.eigenvectors
    return rho.clipped_eigenvalues, sigma.clipped_eigenvalues, np.abs(w) ** 2


def alpha_relative_renyi(rho, sigma, alpha: float, rank_tol: float = DEFAULT_RANK_TOL) -> DivergenceValue:
    """The alpha-relative (Petz) Renyi entropy (1/(alpha-1)) log2 tr(rho^alpha sigma^(1-alpha)).

    ``alpha = 0`` returns :func:`d0`.
    """
    alpha = _check_alpha(alpha, allow_zero=True)
    rho, sigma = _density(rho), _psd(sigma)
    if alpha == 0.0:
        return d0(rho, sigma, rank_tol)
    rel = support_relation(rho, sigma, rank_tol)
    if alpha > 1 and rel is SupportRelation.INCOMPARABLE:
        return DivergenceValue(math.inf, alpha, rel)
    r, s, ov = _overlaps(rho, sigma)
    mr, ms = support_mask(r, rank_tol), support_mask(s, rank_tol)
    ov = ov[np.ix_(mr, ms)]
    with np.errstate(divide="ignore"):
        terms = alpha * np.log(r[mr])[:, None] + (1.0 - alpha) * np.log(s[ms])[None, :] + np.log(ov)
    if not np.isfinite(terms).any():
        return DivergenceValue(math.inf, alpha, rel)
    lt = float(logsumexp(terms[np.isfinite(terms)]))
    return DivergenceValue(lt / ((alpha - 1.0) * LN2), alpha, rel)


def relative_entropy(rho, sigma, rank_tol: float = DEFAULT_RANK_TOL) -> DivergenceValue:
    """Umegaki relative entropy tr(rho log rho) - tr(rho log sigma), in bits."""
    rho, sigma = _density(rho), _psd(sigma)
    rel = support_relation(rho, sigma, rank_tol)
    if rel is SupportRelation.INCOMPARABLE:
        return DivergenceValue(math.inf, "one-limit", rel)
    r, s, ov = _overlaps(rho, sigma)
    mr, ms = support_mask(r, rank_tol), support_mask(s, rank_tol)
    rr = r[mr]
    neg_entropy = float(np.dot(rr, np.log2(rr)))
    cross = float(rr @ ov[np.ix_(mr, ms)] @ np.log2(s[ms]))
    return DivergenceValue(neg_entropy - cross, "one-limit", rel)


def d_min(rho, sigma, rank_tol: float = DEFAULT_RANK_TOL) -> DivergenceValue:
    """Min-relative entropy -2 log2 ||sqrt(rho) sqrt(sigma)||_1."""
    rho, sigma = _density(rho), _psd(sigma)
    rel = support_relation(rho, sigma, rank_tol)
    prod = matrix_power_psd(rho, 0.5, rank_tol).data @ matrix_power_psd(sigma, 0.5, rank_tol).data
    norm = trace_norm(prod)
    value = math.inf if norm <= 0.0 else -2.0 * math.log2(norm)
    return DivergenceValue(value, "min", rel)


def d_max(rho, sigma, rank_tol: float = DEFAULT_RANK_TOL) -> DivergenceValue:
    """Max-relative entropy inf{g : rho <= 2^g sigma}."""
    rho, sigma = _density(rho), _psd(sigma)
    rel = support_relation(rho, sigma, rank_tol)
    if rel is SupportRelation.INCOMPARABLE:
        return DivergenceValue(math.inf, "max", rel)
    inv_sqrt = matrix_power_psd(sigma, -0.5, rank_tol).data
    top = eig_hermitian(inv_sqrt @ rho.data @ inv_sqrt).eigenvalues[0]
    return DivergenceValue(math.log2(top), "max", rel)


def d0(rho, sigma, rank_tol: float = DEFAULT_RANK_TOL) -> DivergenceValue:
    """0-relative Renyi entropy -log2 tr(P_rho sigma), P_rho the support projector of rho."""
    rho, sigma = _density(rho), _psd(sigma)
    rel = support_relation(rho, sigma, rank_tol)
    proj = support_projector(rho, rank_tol)
    overlap = float(np.real(np.vdot(proj.data, sigma.data)))
    if overlap <= rank_tol * max(sigma.trace(), np.finfo(float).tiny):
        return DivergenceValue(math.inf, "zero-limit", rel)
    return DivergenceValue(0.0 - math.log2(overlap), "zero-limit", rel)


# --- hypothesis testing -------------------------------------------------------

_NP_MAX_ITER = 200
_NP_ZERO_TOL = 1e-9


def _positive_part_weight(rho: np.ndarray, sigma: np.ndarray, t: float) -> tuple[float, np.ndarray, np.ndarray]:
    """tr(P+ rho) for P+ the projector on the positive eigenspace of rho - t sigma."""
    spec = eig_hermitian(rho - t * sigma)
    lam = spec.eigenvalues
    scale = np.abs(lam).max(initial=0.0) + 1e-300
    plus = lam > _NP_ZERO_TOL * scale
    zero = np.abs(lam) <= _NP_ZERO_TOL * scale
    vp = spec.eigenvectors[:, plus]
    return float(np.real(np.einsum("ij,ik,kj->", vp.conj(), rho, vp))), spec.eigenvectors[:, plus], spec.eigenvectors[:, zero]


def _finish_test(a: np.ndarray, rho: np.ndarray, sigma: np.ndarray, epsilon: float) -> HypothesisTest:
    a = 0.5 * (a + a.conj().T)
    type1 = 1.0 - float(np.real(np.vdot(a, rho)))
    type2 = max(float(np.real(np.vdot(a, sigma))), 0.0)
    value = math.inf if type2 == 0.0 else 0.0 - math.log2(type2)
    return HypothesisTest(HermitianOperator(a), max(type1, 0.0), type2, epsilon, value)


def hypothesis_testing(rho, sigma, epsilon: float, rank_tol: float = DEFAULT_RANK_TOL) -> HypothesisTest:
    """Hypothesis-testing relative entropy via the quantum Neyman-Pearson test.

    Bisects on ``t >= 0`` for the threshold where tr(P+(t) rho) crosses
    ``1 - epsilon``, P+(t) being the positive-eigenspace projector of
    ``rho - t sigma``; the zero eigenspace at the crossing receives a uniform
    weight so the type-I error is exactly ``epsilon`` when the spectrum allows.
    """
    epsilon = float(epsilon)
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon={epsilon!r} must lie in [0, 1)")
    rho_op, sigma_op = _density(rho), _psd(sigma)
    r, s = rho_op.data, sigma_op.data
    target = 1.0 - epsilon
    n = rho_op.dim

    if epsilon == 0.0:
        proj = support_projector(rho_op, rank_tol).data
        return _finish_test(proj, r, s, epsilon)

    # tests living on ker(sigma) cost nothing under sigma
    ker = np.eye(n) - support_projector(sigma_op, rank_tol).data
    if float(np.real(np.vdot(ker, r))) >= target:
        return _finish_test(ker, r, s, epsilon)

    lo, hi = 0.0, 1.0
    for _ in range(_NP_MAX_ITER):
        if _positive_part_weight(r, s, hi)[0] < target:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NumericalFailure("no threshold found where the type-I constraint binds")
    for _ in range(_NP_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _positive_part_weight(r, s, mid)[0] >= target:
            lo = mid
        else:
            hi = mid
    else:
        raise NumericalFailure("Neyman-Pearson bisection did not converge")

    weight, vp, v0 = _positive_part_weight(r, s, hi)
    a = vp @ vp.conj().T
    if v0.shape[1]:
        p0 = v0 @ v0.conj().T
        mass = float(np.real(np.vdot(p0, r)))
        if mass > 0.0:
            x = min(max((target - weight) / mass, 0.0), 1.0)
            a = a + x * p0
    test = _finish_test(a, r, s, epsilon)
    holds_lo, _ = loewner_leq(np.zeros((n, n)), test.test_operator, 1e-9)
    holds_hi, _ = loewner_leq(test.test_operator, np.eye(n), 1e-9)
    if not (holds_lo and holds_hi):
        raise NumericalFailure("test operator left [0, I]")
    return test
