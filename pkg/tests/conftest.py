import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# filled by test_acceptance; printed at the end of the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


def random_hermitian(rng, dim):
    from trotterlab.matcore import HermitianOperator

    X = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return HermitianOperator.from_upper(X + X.conj().T)


def random_state(rng, dim):
    from trotterlab.matcore import StateVector

    return StateVector.normalized(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
