import numpy as np
import pytest

ACCEPTANCE_LINES = []


def rand_density(rng, n, rank=None):
    rank = n if rank is None else rank
    x = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    m = x @ x.conj().T
    return m / np.trace(m).real


def rand_unitary(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def rand_hermitian(rng, n):
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (x + x.conj().T)


def eigh_power(m, p, tol=1e-10):
    """Reference pseudo-power through LAPACK, independent of the Jacobi path."""
    lam, v = np.linalg.eigh(m)
    lam = np.clip(lam, 0, None)
    on = lam > tol * lam.max()
    f = np.zeros_like(lam)
    f[on] = lam[on] ** p
    return (v * f) @ v.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def criterion(request):
    """Record a named acceptance result; printed in the terminal summary."""

    def record(name, passed, detail="", status=None):
        status = status or ("PASS" if passed else "FAIL")
        ACCEPTANCE_LINES.append(f"{status}  {name}  {detail}".rstrip())
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
