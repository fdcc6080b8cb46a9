import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# hypothesis drives a seed; numpy does the sampling so draws stay cheap
seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def basis(d: int, i: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[i] = 1
    return v


def proj(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


# acceptance criteria report lines, printed once at the end of the session
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
