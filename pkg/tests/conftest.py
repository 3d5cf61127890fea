import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cherenkov_causality.model import PhysicalConfig

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

TWO_PI = 2 * np.pi
OMEGA = TWO_PI * 4e9


@pytest.fixture
def base_config():
    return PhysicalConfig()


@pytest.fixture
def small_config():
    """Cheap single-mode config (cutoff 3) for integration tests."""
    return PhysicalConfig(fock_cutoff=3)


def random_state(rng, n, rank=None):
    rank = n if rank is None else rank
    a = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_kraus(rng, n_kraus, dim=2):
    """Kraus operators of a random CPTP map (Stinespring isometry)."""
    v = random_unitary(rng, dim * n_kraus)[:, :dim]
    return [v[k * dim:(k + 1) * dim] for k in range(n_kraus)]


# criterion number -> (passed, detail), filled by test_acceptance
RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(RESULTS):
        ok, text = RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {text}")
