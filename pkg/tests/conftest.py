import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ng_geometry import gaussian

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def thermal4():
    return gaussian.thermal_state(4.0)


@pytest.fixture(scope="session")
def p4():
    return gaussian.thermal_probs(4.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_mixed_state(rng, dim, rank=None):
    """Random density matrix whose weight sits in the lower half of the box."""
    live = dim // 2
    rank = rank or live
    g = rng.standard_normal((live, rank)) + 1j * rng.standard_normal((live, rank))
    data = np.zeros((dim, dim), dtype=complex)
    data[:live, :live] = g @ g.conj().T
    return data / np.trace(data).real


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(criterion, checks):
        failed = [name for name, ok, _ in checks if not ok]
        detail = "; ".join(f"{name}={'ok' if ok else 'FAIL'} ({info})" for name, ok, info in checks)
        line = f"criterion {criterion}: {'FAIL' if failed else 'PASS'} | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return failed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
