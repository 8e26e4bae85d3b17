import numpy as np
import pytest


def complex_gaussian(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hermitian(rng, d):
    A = complex_gaussian(rng, (d, d))
    return (A + A.conj().T) / 2


def random_psd(rng, d, rank=None):
    A = complex_gaussian(rng, (d, rank or d))
    return A @ A.conj().T


def random_density(rng, d):
    M = random_psd(rng, d)
    return M / np.trace(M).real


def random_projector_pair(rng, d, k=None):
    """Two complementary projectors of ranks k and d-k."""
    k = d // 2 if k is None else k
    Q, _ = np.linalg.qr(complex_gaussian(rng, (d, d)))
    P = Q[:, :k] @ Q[:, :k].conj().T
    return P, np.eye(d) - P


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, echoed again in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
