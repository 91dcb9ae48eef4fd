"""Numerical checks of the alpha -> 0 limit, the bounds around it, and the
data-processing / convexity claims for the sandwiched divergence.

Fuzz suites derive one 64-bit seed per trial from ``(seed, trial)``; every
instance is rebuilt from that trial seed alone, so a recorded violation can be
replayed with the matching ``*_instance`` function.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import logsumexp

from qrenyi.channels import KrausChannel, apply_channel, random_isometry, random_psd_matrix, random_unitary, rank_one_pinching
from qrenyi.divergences import (
    LN2,
    SupportRelation,
    alpha_relative_renyi,
    d0,
    log_trace_sandwich,
    sandwiched_renyi,
    support_relation,
)
from qrenyi.errors import SupportMismatch
from qrenyi.linalg import (
    DEFAULT_RANK_TOL,
    DensityOperator,
    HermitianOperator,
    PsdOperator,
    eig_hermitian,
    loewner_leq,
    matrix_power_psd,
    support_mask,
)

DEFAULT_LADDER = (1e-1, 1e-2, 1e-3, 1e-4)
PETZ_BOUND_GRID = (0.1, 0.25, 0.5, 0.75, 0.9, 1.5, 2.0, 5.0)
VIOLATION_TOL = 1e-9
PROPERTIES = ("dpi", "joint_convexity", "lemma3", "positivity", "alt_i", "alt_ii")


@dataclass
class FuzzReport:
    """Outcome of a randomized property check.

    ``margin`` is signed so that positive means the inequality is violated;
    ``worst_margin`` is the largest margin seen (``-inf`` before any trial).
    """

    property: str
    trials: int = 0
    violations: list = field(default_factory=list)
    worst_margin: float = -math.inf
    skipped: int = 0

    def record(self, seed, alpha, lhs, rhs, margin, tol=VIOLATION_TOL):
        self.trials += 1
        self.worst_margin = max(self.worst_margin, float(margin))
        if margin > tol:
            self.violations.append((int(seed), float(alpha), float(lhs), float(rhs), float(margin)))

    def merge(self, other: FuzzReport) -> FuzzReport:
        if other.property != self.property:
            raise ValueError("cannot merge reports for different properties")
        return FuzzReport(
            self.property,
            self.trials + other.trials,
            self.violations + other.violations,
            max(self.worst_margin, other.worst_margin),
            self.skipped + other.skipped,
        )

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        d = asdict(self)
        d["violations"] = [dict(zip(("seed", "alpha", "lhs", "rhs", "margin"), v)) for v in self.violations]
        return d

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else "-inf" if obj < 0 else "nan"
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(trial)]).generate_state(1, np.uint64)[0])


def _as_state(m) -> DensityOperator:
    m = np.asarray(m)
    return DensityOperator(m / np.trace(m).real)


# --- limit and bounds -------------------------------------------------------


def limit_at_zero(rho, sigma, alphas=DEFAULT_LADDER, rank_tol: float = DEFAULT_RANK_TOL):
    """Evaluate D_alpha down a decreasing alpha ladder.

    Returns ``(estimate, samples, relation)``: the value at the last rung,
    ``[(alpha, D_alpha), ...]``, and the support relation telling which
    branch of the limit identity applies.
    """
    alphas = [float(a) for a in alphas]
    if not alphas or any(a <= 0 for a in alphas) or any(b >= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be a strictly decreasing positive sequence")
    samples = [(a, sandwiched_renyi(rho, sigma, a, rank_tol).value) for a in alphas]
    return samples[-1][1], samples, support_relation(rho, sigma, rank_tol)


def check_lemma3(rho, sigma, alpha_grid=PETZ_BOUND_GRID, seed: int = 0, rank_tol: float = DEFAULT_RANK_TOL) -> FuzzReport:
    """D_alpha <= Petz D~_alpha at each grid point (margin = D_alpha - D~_alpha)."""
    report = FuzzReport("lemma3")
    if support_relation(rho, sigma, rank_tol) is SupportRelation.INCOMPARABLE:
        report.skipped += 1
        return report
    for a in alpha_grid:
        lhs = sandwiched_renyi(rho, sigma, a, rank_tol).value
        rhs = alpha_relative_renyi(rho, sigma, a, rank_tol).value
        report.record(seed, a, lhs, rhs, lhs - rhs)
    return report


@dataclass
class LowerBoundDiagnostics:
    """Intermediate objects of the pinching lower bound at one alpha.

    ``bound_chain`` holds (D_alpha, pinched lower bound, D~_0).
    """

    alpha: float
    c_alpha: HermitianOperator
    q_alpha: HermitianOperator
    mu: np.ndarray
    s: np.ndarray
    pinching_margin: float
    pinching_holds: bool
    log_trace_c: float
    log_trace_q: float
    bound_chain: tuple

    @property
    def trace_inequality_gap(self) -> float:
        """Relative slack of tr C^a <= n^a tr Q^a (negative means it fails)."""
        n = len(self.mu)
        rhs = self.alpha * math.log(n) + self.log_trace_q
        return -math.expm1(self.log_trace_c - rhs)


def lower_bound_diagnostics(rho, sigma, alpha: float, rank_tol: float = DEFAULT_RANK_TOL) -> LowerBoundDiagnostics:
    """Build C_a = sigma^b rho sigma^b and its rank-one pinched majorant n Q_a.

    Requires equal supports (checked by rank and mutual projector containment).
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    rho = rho if isinstance(rho, DensityOperator) else DensityOperator(rho)
    sigma = sigma if isinstance(sigma, PsdOperator) else PsdOperator(sigma)
    if support_relation(rho, sigma, rank_tol) is not SupportRelation.EQUAL:
        raise SupportMismatch("lower-bound diagnostics need supp rho == supp sigma")
    beta = (1.0 - alpha) / (2.0 * alpha)
    n = rho.dim
    pvm = rank_one_pinching(sigma)
    s = np.array(pvm.levels)
    psi = pvm.basis
    r = rho.clipped_eigenvalues
    overlap = np.abs(rho.spectrum.eigenvectors.conj().T @ psi) ** 2
    mu = r @ overlap

    sb = matrix_power_psd(sigma, beta, rank_tol).data
    c = HermitianOperator(sb @ rho.data @ sb)
    on = support_mask(s, rank_tol)
    q_diag = np.zeros(n)
    q_diag[on] = s[on] ** (2 * beta) * mu[on]
    q = HermitianOperator((psi * q_diag) @ psi.conj().T)
    holds, margin = loewner_leq(c, n * q.data, 1e-9)

    log_tr_c = log_trace_sandwich(rho, sigma, alpha, rank_tol)
    keep = on & (mu > 0)
    log_tr_q = float(logsumexp((1 - alpha) * np.log(s[keep]) + alpha * np.log(mu[keep])))
    d_alpha = log_tr_c / ((alpha - 1) * LN2)
    lower = (alpha * math.log(n) + log_tr_q) / ((alpha - 1) * LN2)
    return LowerBoundDiagnostics(
        alpha=alpha,
        c_alpha=c,
        q_alpha=q,
        mu=mu,
        s=s,
        pinching_margin=margin,
        pinching_holds=holds,
        log_trace_c=log_tr_c,
        log_trace_q=log_tr_q,
        bound_chain=(d_alpha, lower, d0(rho, sigma, rank_tol).value),
    )


@dataclass
class CounterexampleReport:
    """rho = |0><0| against sigma = [[1, c], [c, 1]] at one alpha."""

    c: float
    alpha: float
    lambda1_log: float
    d_alpha_numeric: float
    d_alpha_closed: float
    limit_closed: float
    d0_value: float
    match_tol: float = 1e-9

    @property
    def lambda1(self) -> float:
        """Nonzero eigenvalue of sigma^b rho sigma^b (overflows to inf for tiny alpha)."""
        with np.errstate(over="ignore"):
            return float(np.exp(self.lambda1_log))

    @property
    def ok(self) -> bool:
        return abs(self.d_alpha_numeric - self.d_alpha_closed) <= self.match_tol and self.d0_value == 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda1"] = self.lambda1
        d["ok"] = self.ok
        return d

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), sort_keys=True)


def counterexample_pair(c: float) -> tuple[DensityOperator, PsdOperator]:
    return DensityOperator(np.diag([1.0, 0.0])), PsdOperator(np.array([[1.0, c], [c, 1.0]]))


def counterexample_report(c: float, alpha: float) -> CounterexampleReport:
    """Compare the numeric D_alpha on the 2x2 pair with its closed form.

    The nonzero eigenvalue is ((1+c)^{2b} + (1-c)^{2b}) / 2; its log is
    evaluated as 2b log(1+c) - log 2 + log1p(((1-c)/(1+c))^{2b}) so that
    alpha near 0 does not overflow.
    """
    c, alpha = float(c), float(alpha)
    if not 0.0 < c < 1.0:
        raise ValueError("c must lie in (0, 1)")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    beta = (1.0 - alpha) / (2.0 * alpha)
    ratio = (1.0 - c) / (1.0 + c)
    log_l1 = 2 * beta * math.log1p(c) - LN2 + math.log1p(math.exp(2 * beta * math.log(ratio)))
    closed = alpha * log_l1 / ((alpha - 1.0) * LN2)
    rho, sigma = counterexample_pair(c)
    return CounterexampleReport(
        c=c,
        alpha=alpha,
        lambda1_log=log_l1,
        d_alpha_numeric=sandwiched_renyi(rho, sigma, alpha).value,
        d_alpha_closed=closed,
        limit_closed=-math.log2(1.0 + c),
        d0_value=d0(rho, sigma).value,
    )


def _trace_power(m: np.ndarray, p: float, rank_tol: float) -> float:
    lam = np.clip(eig_hermitian(m).eigenvalues, 0.0, None)
    on = support_mask(lam, rank_tol)
    return float(np.sum(lam[on] ** p))


def alt_sides(a, b, r: float, q: float, rank_tol: float = DEFAULT_RANK_TOL) -> tuple[float, float]:
    """Both sides of Araki-Lieb-Thirring: tr(B^1/2 A B^1/2)^{rq} and tr(B^{r/2} A^r B^{r/2})^q."""
    bh = matrix_power_psd(b, 0.5, rank_tol).data
    lhs = _trace_power(bh @ np.asarray(a) @ bh, r * q, rank_tol)
    br = matrix_power_psd(b, 0.5 * r, rank_tol).data
    ar = matrix_power_psd(a, r, rank_tol).data
    rhs = _trace_power(br @ ar @ br, q, rank_tol)
    return lhs, rhs


def check_alt(a, b, r: float, q: float, seed: int = 0, rank_tol: float = DEFAULT_RANK_TOL) -> FuzzReport:
    """One Araki-Lieb-Thirring evaluation; r >= 1 expects lhs <= rhs, r < 1 the reverse.

    The margin is relative to max(|lhs|, |rhs|).
    """
    if r < 0 or q < 0:
        raise ValueError("r and q must be non-negative")
    a = a if isinstance(a, PsdOperator) else PsdOperator(a)
    b = b if isinstance(b, PsdOperator) else PsdOperator(b)
    lhs, rhs = alt_sides(a, b, r, q, rank_tol)
    denom = max(abs(lhs), abs(rhs), np.finfo(float).tiny)
    branch = "alt_i" if r >= 1 else "alt_ii"
    margin = (lhs - rhs) / denom if r >= 1 else (rhs - lhs) / denom
    report = FuzzReport(branch)
    report.record(seed, r, lhs, rhs, margin)
    return report


# --- seeded instance builders -------------------------------------------------


def pair_instance(seed: int, dims=(2, 3), rho_rank: str = "full", sigma_rank: str = "full", subnormalized: bool = False):
    """Random (rho, sigma) pair.

    ``rho_rank`` / ``sigma_rank`` are ``"full"`` or ``"random"``; with
    ``subnormalized`` sigma's trace is drawn uniformly from [0.5, 1].
    """
    rng = np.random.default_rng(seed)
    n = int(rng.choice(dims))
    rr = n if rho_rank == "full" else int(rng.integers(1, n + 1))
    rs = n if sigma_rank == "full" else int(rng.integers(1, n + 1))
    rho = _as_state(random_psd_matrix(rng, n, rr))
    sig = _as_state(random_psd_matrix(rng, n, rs)).data
    scale = rng.uniform(0.5, 1.0) if subnormalized else 1.0
    return rho, PsdOperator(scale * sig)


def dpi_instance(seed: int, dims=(2, 3), kraus_range=(2, 4), unitary_only: bool = False):
    """Random (rho, sigma, channel) triple with random ranks and 2-4 Kraus operators."""
    rng = np.random.default_rng(seed)
    n = int(rng.choice(dims))
    rho = _as_state(random_psd_matrix(rng, n, int(rng.integers(1, n + 1))))
    sigma = _as_state(random_psd_matrix(rng, n, int(rng.integers(1, n + 1))))
    if unitary_only:
        return rho, sigma, KrausChannel((random_unitary(rng, n),))
    k = int(rng.integers(kraus_range[0], kraus_range[1] + 1))
    v = random_isometry(rng, n * k, n)
    return rho, sigma, KrausChannel(tuple(v[i * n:(i + 1) * n] for i in range(k)))


def alt_instance(seed: int, dims=(2, 3)):
    rng = np.random.default_rng(seed)
    n = int(rng.choice(dims))
    a = random_psd_matrix(rng, n)
    b = random_psd_matrix(rng, n)
    return PsdOperator(a / np.trace(a).real), PsdOperator(b / np.trace(b).real)


# --- fuzz suites ------------------------------------------------------------


def fuzz_dpi(alpha: float, trials: int, seed: int = 0, dims=(2, 3), kraus_range=(2, 4),
             unitary_only: bool = False, stop_after: int | None = None) -> FuzzReport:
    """Search for D_alpha(L rho || L sigma) > D_alpha(rho || sigma) over random triples.

    Trials where either side is infinite are skipped.  ``stop_after`` ends the
    search once that many violations have been recorded.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    report = FuzzReport("dpi")
    for t in range(trials):
        ts = trial_seed(seed, t)
        rho, sigma, ch = dpi_instance(ts, dims, kraus_range, unitary_only)
        rhs = sandwiched_renyi(rho, sigma, alpha).value
        lhs = sandwiched_renyi(apply_channel(ch, rho), apply_channel(ch, sigma), alpha).value
        if not (math.isfinite(lhs) and math.isfinite(rhs)):
            report.skipped += 1
            continue
        report.record(ts, alpha, lhs, rhs, lhs - rhs)
        if stop_after is not None and len(report.violations) >= stop_after:
            break
    return report


def joint_convexity_instance(seed: int, mixture_size: int, dims=(2, 3)):
    rng = np.random.default_rng(seed)
    n = int(rng.choice(dims))
    p = rng.dirichlet(np.ones(mixture_size))
    rhos = [_as_state(random_psd_matrix(rng, n)) for _ in range(mixture_size)]
    sigmas = [_as_state(random_psd_matrix(rng, n)) for _ in range(mixture_size)]
    return p, rhos, sigmas


def fuzz_joint_convexity(alpha: float, trials: int, seed: int = 0, mixture_size: int = 2, dims=(2, 3)) -> FuzzReport:
    """D_a(sum p_i rho_i || sum p_i sigma_i) <= sum p_i D_a(rho_i || sigma_i)."""
    if not 0.5 <= alpha < 1.0:
        raise ValueError("joint convexity is checked for alpha in [1/2, 1)")
    report = FuzzReport("joint_convexity")
    for t in range(trials):
        ts = trial_seed(seed, t)
        p, rhos, sigmas = joint_convexity_instance(ts, mixture_size, dims)
        rho = DensityOperator(sum(w * r.data for w, r in zip(p, rhos)))
        sigma = DensityOperator(sum(w * s.data for w, s in zip(p, sigmas)))
        lhs = sandwiched_renyi(rho, sigma, alpha).value
        rhs = float(sum(w * sandwiched_renyi(r, s, alpha).value for w, r, s in zip(p, rhos, sigmas)))
        report.record(ts, alpha, lhs, rhs, lhs - rhs)
    return report


def fuzz_lemma3(trials: int, seed: int = 0, dims=(2, 3), alpha_grid=PETZ_BOUND_GRID) -> FuzzReport:
    """Sandwiched <= Petz bound over pairs with rho of random rank and sigma full rank."""
    report = FuzzReport("lemma3")
    for t in range(trials):
        ts = trial_seed(seed, t)
        rho, sigma = pair_instance(ts, dims, rho_rank="random")
        report = report.merge(check_lemma3(rho, sigma, alpha_grid, seed=ts))
    return report


def fuzz_positivity(trials: int, seed: int = 0, dims=(2, 3), alpha_grid=PETZ_BOUND_GRID) -> FuzzReport:
    """D_alpha(rho || sigma) >= 0 for density operators (margin = -D_alpha)."""
    report = FuzzReport("positivity")
    for t in range(trials):
        ts = trial_seed(seed, t)
        rho, sigma = pair_instance(ts, dims, rho_rank="random", sigma_rank="random")
        for a in alpha_grid:
            d = sandwiched_renyi(rho, sigma, a).value
            report.record(ts, a, 0.0, d, -d)
    return report


ALT_R = (0.2, 0.5, 0.8, 1.0, 1.5, 3.0)
ALT_Q = (0.5, 1.0, 2.0)


def fuzz_alt(trials: int, seed: int = 0, dims=(2, 3), r_grid=ALT_R, q_grid=ALT_Q) -> dict:
    """Both Araki-Lieb-Thirring branches over random (A, B); returns {'alt_i': ..., 'alt_ii': ...}.

    The ``alpha`` slot of each violation records r.
    """
    out = {"alt_i": FuzzReport("alt_i"), "alt_ii": FuzzReport("alt_ii")}
    for t in range(trials):
        ts = trial_seed(seed, t)
        a, b = alt_instance(ts, dims)
        for r in r_grid:
            for q in q_grid:
                rep = check_alt(a, b, r, q, seed=ts)
                out[rep.property] = out[rep.property].merge(rep)
    return out
