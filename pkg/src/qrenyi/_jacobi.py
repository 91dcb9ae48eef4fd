"""Cyclic complex Jacobi kernel (numba)."""

import numpy as np
from numba import njit


@njit(cache=True)
def jacobi_sweeps(h, v, rel_tol, abs_tol, max_sweeps):
    """Diagonalize the Hermitian ``h`` in place, accumulating rotations in ``v``.

    Pivots are visited row-major. A pivot is skipped when
    ``|h_pq| <= rel_tol * sqrt(|h_pp h_qq|)`` or ``|h_pq| <= abs_tol``; the
    relative test keeps small eigenvalues of graded PSD matrices accurate.
    Returns the number of sweeps used, or -1 if ``max_sweeps`` was hit.
    """
    n = h.shape[0]
    for sweep in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = h[p, q]
                ag = abs(g)
                if ag == 0.0 or ag <= abs_tol:
                    continue
                a = h[p, p].real
                b = h[q, q].real
                if ag <= rel_tol * np.sqrt(abs(a * b)):
                    continue
                rotated = True
                e = g / ag
                tau = (b - a) / (2.0 * ag)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                se = s * e
                sec = s * np.conj(e)
                for k in range(n):
                    hkp = h[k, p]
                    hkq = h[k, q]
                    h[k, p] = c * hkp - sec * hkq
                    h[k, q] = se * hkp + c * hkq
                for k in range(n):
                    hpk = h[p, k]
                    hqk = h[q, k]
                    h[p, k] = c * hpk - se * hqk
                    h[q, k] = sec * hpk + c * hqk
                h[p, p] = a - t * ag
                h[q, q] = b + t * ag
                h[p, q] = 0.0
                h[q, p] = 0.0
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - sec * vkq
                    v[k, q] = se * vkp + c * vkq
        if not rotated:
            return sweep + 1
    return -1
