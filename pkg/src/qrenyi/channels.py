"""CPTP maps, pinching maps and seeded random instance generators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qrenyi.errors import DimensionMismatch
from qrenyi.linalg import (
    DensityOperator,
    HermitianOperator,
    Projector,
    PsdOperator,
    as_matrix,
    eig_hermitian,
)

COMPLETENESS_TOL = 1e-9
DEFAULT_DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class KrausChannel:
    """Channel X -> sum_i K_i X K_i^H with sum_i K_i^H K_i = I."""

    kraus: tuple
    completeness_tol: float = COMPLETENESS_TOL

    def __post_init__(self):
        ks = tuple(np.array(k, dtype=complex) for k in self.kraus)
        if not ks:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ks[0].shape
        if any(k.shape != shape or k.ndim != 2 for k in ks):
            raise DimensionMismatch("Kraus operators must share one 2-d shape")
        for k in ks:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ks)
        gram = sum(k.conj().T @ k for k in ks)
        err = np.abs(gram - np.eye(shape[1])).max()
        if err > self.completeness_tol:
            raise ValueError(f"Kraus completeness violated by {err:.3e}")

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    def __call__(self, x):
        return apply_channel(self, x)


def apply_channel(channel: KrausChannel, x):
    """Apply ``channel`` to the Hermitian ``x``, keeping PSD/density certification where it applies."""
    m = as_matrix(x)
    if m.shape[0] != channel.dim_in:
        raise DimensionMismatch(f"input dimension {m.shape[0]} != channel dim_in {channel.dim_in}")
    out = sum(k @ m @ k.conj().T for k in channel.kraus)
    if isinstance(x, DensityOperator):
        return DensityOperator(out)
    if isinstance(x, PsdOperator):
        return PsdOperator(out)
    return HermitianOperator(out)


@dataclass(frozen=True)
class PinchingMap:
    """Orthogonal projectors P_i summing to I, with the spectral value each one carries."""

    projectors: tuple
    levels: tuple = ()
    basis: np.ndarray | None = None

    @property
    def count(self) -> int:
        return len(self.projectors)

    @property
    def dim(self) -> int:
        return self.projectors[0].dim

    def __call__(self, omega):
        return apply_pinching(self, omega)


def _group_projectors(vecs: np.ndarray, groups: list[list[int]]) -> tuple:
    out = []
    for g in groups:
        w = vecs[:, g]
        out.append(Projector(w @ w.conj().T, rank=len(g)))
    return tuple(out)


def pinching_from(b, degeneracy_tol: float = DEFAULT_DEGENERACY_TOL) -> PinchingMap:
    """Pinching by the spectral projectors of ``b``.

    Eigenvalues closer than ``degeneracy_tol * (1 + max|lambda|)`` share a
    projector, so ``count`` is the number n(B) of distinct eigenvalues.
    """
    spec = b.spectrum if isinstance(b, HermitianOperator) else eig_hermitian(b)
    lam = spec.eigenvalues
    tol = degeneracy_tol * (1.0 + np.abs(lam).max())
    groups = [[0]]
    for i in range(1, len(lam)):
        if lam[groups[-1][0]] - lam[i] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    levels = tuple(float(lam[g].mean()) for g in groups)
    return PinchingMap(_group_projectors(spec.eigenvectors, groups), levels)


def _gram_schmidt(cols: np.ndarray) -> np.ndarray:
    q = np.array(cols, dtype=complex)
    for j in range(q.shape[1]):
        for i in range(j):
            q[:, j] -= np.vdot(q[:, i], q[:, j]) * q[:, i]
        q[:, j] /= np.linalg.norm(q[:, j])
    return q


def rank_one_pinching(sigma, degeneracy_tol: float = DEFAULT_DEGENERACY_TOL) -> PinchingMap:
    """Rank-one PVM from an eigenbasis of ``sigma``, eigenvalues repeated by multiplicity.

    Each degenerate eigenspace is re-orthonormalized by Gram-Schmidt in solver
    order, so the basis choice is deterministic.
    """
    spec = sigma.spectrum if isinstance(sigma, HermitianOperator) else eig_hermitian(sigma)
    lam = spec.eigenvalues
    vecs = np.array(spec.eigenvectors)
    tol = degeneracy_tol * (1.0 + np.abs(lam).max())
    start = 0
    for i in range(1, len(lam) + 1):
        if i == len(lam) or lam[start] - lam[i] > tol:
            vecs[:, start:i] = _gram_schmidt(vecs[:, start:i])
            start = i
    projs = tuple(Projector(np.outer(vecs[:, j], vecs[:, j].conj()), rank=1) for j in range(len(lam)))
    vecs.setflags(write=False)
    return PinchingMap(projs, tuple(float(x) for x in lam), vecs)


def apply_pinching(pinching: PinchingMap, omega) -> HermitianOperator:
    m = as_matrix(omega)
    if m.shape[0] != pinching.dim:
        raise DimensionMismatch("pinching and operator dimensions differ")
    return HermitianOperator(sum(p.data @ m @ p.data for p in pinching.projectors))


# --- random instances -------------------------------------------------------


@dataclass(frozen=True)
class RandomSpec:
    """Seed and shape of a random instance; identical specs give identical output."""

    seed: int
    dim: int
    rank: int | None = None
    kraus_count: int = 1
    dim_out: int | None = None

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_psd_matrix(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    """Unnormalized X X^H with X a dim x rank complex Gaussian matrix."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must lie in [1, {dim}]")
    x = _ginibre(rng, dim, rank)
    return x @ x.conj().T


def random_density(spec: RandomSpec) -> DensityOperator:
    m = random_psd_matrix(spec.rng(), spec.dim, spec.rank)
    return DensityOperator(m / np.trace(m).real)


def random_psd(spec: RandomSpec, trace: float = 1.0) -> PsdOperator:
    m = random_psd_matrix(spec.rng(), spec.dim, spec.rank)
    return PsdOperator(trace * m / np.trace(m).real)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar unitary from the phase-corrected QR of a Ginibre matrix."""
    q, r = np.linalg.qr(_ginibre(rng, dim, dim))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_isometry(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    q, r = np.linalg.qr(_ginibre(rng, rows, cols))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_channel(spec: RandomSpec) -> KrausChannel:
    """Kraus operators cut from a random (dim_out * kraus_count) x dim isometry."""
    if spec.kraus_count < 1:
        raise ValueError("kraus_count must be >= 1")
    dim_out = spec.dim if spec.dim_out is None else spec.dim_out
    if dim_out * spec.kraus_count < spec.dim:
        raise ValueError("dim_out * kraus_count must be at least dim_in")
    v = random_isometry(spec.rng(), dim_out * spec.kraus_count, spec.dim)
    return KrausChannel(tuple(v[i * dim_out:(i + 1) * dim_out] for i in range(spec.kraus_count)))


def partial_trace_channel(dim_keep: int, dim_drop: int) -> KrausChannel:
    """Trace out the second tensor factor: K_i = I (x) <i|."""
    eye = np.eye(dim_keep)
    return KrausChannel(tuple(np.kron(eye, np.eye(dim_drop)[i:i + 1]) for i in range(dim_drop)))


def depolarizing_channel(dim: int) -> KrausChannel:
    """Completely depolarizing map X -> tr(X) I / dim, with Kraus set |i><j| / sqrt(dim)."""
    ks = []
    for i in range(dim):
        for j in range(dim):
            k = np.zeros((dim, dim))
            k[i, j] = 1.0 / np.sqrt(dim)
            ks.append(k)
    return KrausChannel(tuple(ks))
