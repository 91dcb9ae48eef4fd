"""Dense complex Hermitian linear algebra.

Everything here is built on a cyclic Jacobi eigensolver so that results are
reproducible bit for bit and small eigenvalues of graded PSD matrices keep
their relative accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from qrenyi._jacobi import jacobi_sweeps
from qrenyi.errors import DimensionMismatch, NotNormalized, NotPositiveSemidefinite, NumericalFailure

DEFAULT_RANK_TOL = 1e-10
DEFAULT_EIGFLOOR = 1e-12
DEFAULT_TRACE_TOL = 1e-9
MAX_SWEEPS = 100
_JACOBI_REL_TOL = 1e-15

__all__ = [
    "DEFAULT_RANK_TOL",
    "HermitianOperator",
    "PsdOperator",
    "DensityOperator",
    "Projector",
    "Spectrum",
    "eig_hermitian",
    "matrix_power_psd",
    "support_projector",
    "loewner_leq",
    "trace_norm",
    "as_matrix",
]


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a square complex ndarray (no copy for ndarrays of the right dtype)."""
    if isinstance(m, HermitianOperator):
        return m.data
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {arr.shape}")
    return arr


class HermitianOperator:
    """Dense Hermitian matrix, symmetrized once on construction.

    The underlying array is read-only; operators are values.
    """

    def __init__(self, entries):
        arr = np.array(as_matrix(entries), dtype=complex)
        if arr.shape[0] < 1:
            raise DimensionMismatch("dimension must be at least 1")
        arr = 0.5 * (arr + arr.conj().T)
        arr.setflags(write=False)
        self._data = arr

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._data.copy() if copy else self._data
        return self._data.astype(dtype)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"

    @cached_property
    def spectrum(self) -> Spectrum:
        return eig_hermitian(self)

    def trace(self) -> float:
        return float(np.trace(self._data).real)

    def __add__(self, other):
        return HermitianOperator(self._data + as_matrix(other))

    def __sub__(self, other):
        return HermitianOperator(self._data - as_matrix(other))

    def __mul__(self, scalar):
        return HermitianOperator(self._data * float(scalar))

    __rmul__ = __mul__


class PsdOperator(HermitianOperator):
    """Hermitian operator certified positive semi-definite.

    Eigenvalues down to ``-eigfloor * (1 + max|lambda|)`` are accepted as roundoff.
    """

    def __init__(self, entries, eigfloor: float = DEFAULT_EIGFLOOR):
        super().__init__(entries)
        self.eigfloor = eigfloor
        lam = self.spectrum.eigenvalues
        scale = 1.0 + np.abs(lam).max()
        if lam[-1] < -eigfloor * scale:
            raise NotPositiveSemidefinite(f"minimum eigenvalue {lam[-1]:.3e} below tolerance")

    @cached_property
    def clipped_eigenvalues(self) -> np.ndarray:
        return np.clip(self.spectrum.eigenvalues, 0.0, None)


class DensityOperator(PsdOperator):
    """PSD operator with unit trace."""

    def __init__(self, entries, eigfloor: float = DEFAULT_EIGFLOOR, trace_tol: float = DEFAULT_TRACE_TOL):
        super().__init__(entries, eigfloor=eigfloor)
        self.trace_tol = trace_tol
        tr = self.trace()
        if abs(tr - 1.0) > trace_tol:
            raise NotNormalized(f"trace {tr!r} differs from 1 by more than {trace_tol}")


class Projector(PsdOperator):
    """Orthogonal projector with its rank recorded."""

    def __init__(self, entries, rank: int):
        HermitianOperator.__init__(self, entries)
        self.eigfloor = DEFAULT_EIGFLOOR
        self.rank = int(rank)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in non-increasing order with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source_dim: int

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def projector(self, mask) -> np.ndarray:
        v = self.eigenvectors[:, mask]
        return v @ v.conj().T


def eig_hermitian(m) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Raises NumericalFailure if the off-diagonal part has not vanished after
    100 full sweeps.
    """
    h = np.array(as_matrix(m), dtype=complex, order="C")
    n = h.shape[0]
    h = 0.5 * (h + h.conj().T)
    v = np.eye(n, dtype=complex)
    if n > 1 and jacobi_sweeps(h, v, _JACOBI_REL_TOL, 0.0, MAX_SWEEPS) < 0:
        raise NumericalFailure(f"Jacobi did not converge in {MAX_SWEEPS} sweeps (n={n})")
    lam = h.diagonal().real.copy()
    order = np.argsort(-lam, kind="stable")
    lam = lam[order]
    v = v[:, order]
    lam.setflags(write=False)
    v.setflags(write=False)
    return Spectrum(lam, v, n)


def _psd_spectrum(a) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(a, PsdOperator):
        return a.clipped_eigenvalues, a.spectrum.eigenvectors
    spec = a.spectrum if isinstance(a, HermitianOperator) else eig_hermitian(a)
    return np.clip(spec.eigenvalues, 0.0, None), spec.eigenvectors


def support_mask(eigenvalues: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Boolean mask of eigenvalues above ``rank_tol`` times the largest one."""
    top = eigenvalues.max() if eigenvalues.size else 0.0
    if top <= 0.0:
        return np.zeros(eigenvalues.shape, dtype=bool)
    return eigenvalues > rank_tol * top


def matrix_power_psd(a, p: float, rank_tol: float = DEFAULT_RANK_TOL) -> PsdOperator:
    """``a**p`` taken on the support of ``a``; off-support eigenvalues map to 0.

    ``p = 0`` therefore gives the support projector, and negative ``p`` a
    pseudo-power.
    """
    lam, v = _psd_spectrum(a)
    mask = support_mask(lam, rank_tol)
    f = np.zeros_like(lam)
    f[mask] = lam[mask] ** p
    return PsdOperator((v * f) @ v.conj().T)


def support_projector(a, rank_tol: float = DEFAULT_RANK_TOL) -> Projector:
    lam, v = _psd_spectrum(a)
    mask = support_mask(lam, rank_tol)
    w = v[:, mask]
    return Projector(w @ w.conj().T, rank=int(mask.sum()))


def loewner_leq(a, b, tol: float = 1e-9) -> tuple[bool, float]:
    """Check ``a <= b`` in the Loewner order.

    Returns ``(holds, margin)`` with margin the smallest eigenvalue of ``b - a``;
    the check passes when margin >= -tol * (1 + ||b - a||).
    """
    diff = as_matrix(b) - as_matrix(a)
    if diff.shape != as_matrix(a).shape:
        raise DimensionMismatch("operands differ in dimension")
    lam = eig_hermitian(diff).eigenvalues
    margin = float(lam[-1])
    norm = float(np.abs(lam).max())
    return margin >= -tol * (1.0 + norm), margin


def trace_norm(m) -> float:
    """Sum of singular values of an arbitrary square complex matrix.

    Computed from the Hermitian dilation [[0, M], [M^H, 0]], whose eigenvalues
    are the singular values with both signs; this avoids the square-root loss
    of accuracy that eigenvalues of M^H M would incur near zero.
    """
    arr = np.asarray(m.data if isinstance(m, HermitianOperator) else m, dtype=complex)
    n = arr.shape[0]
    dil = np.zeros((2 * n, 2 * n), dtype=complex)
    dil[:n, n:] = arr
    dil[n:, :n] = arr.conj().T
    lam = eig_hermitian(dil).eigenvalues
    return float(0.5 * np.abs(lam).sum())
