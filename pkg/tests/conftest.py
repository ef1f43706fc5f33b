import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fermibell.exterior import FermionState
from fermibell.slater import FermionPairState, from_wedge_terms

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

R2 = 1.0 / math.sqrt(2.0)


@pytest.fixture
def eprb() -> FermionPairState:
    """EPRB in the location (x) spin basis L-up, L-down, R-up, R-down."""
    return from_wedge_terms(FermionState.from_terms(4, [(R2, (0, 3)), (-R2, (1, 2))]))


@pytest.fixture
def singlet() -> FermionPairState:
    return from_wedge_terms(FermionState.from_terms(2, [(1.0, (0, 1))]))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Context manager factory recording one PASS/FAIL line per acceptance criterion."""
    log = request.config.stash.setdefault(ACCEPTANCE_KEY, {})

    class _Recorder:
        def __init__(self, number: int, title: str):
            self.number, self.title = number, title

        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            status = "PASS" if exc_type is None else "FAIL"
            line = f"[{status}] criterion {self.number}: {self.title}"
            if exc is not None:
                line += f" ({str(exc).splitlines()[0] if str(exc) else exc_type.__name__})"
            log[self.number] = line
            print(line)
            return False

    return _Recorder


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(ACCEPTANCE_KEY, {})
    if log:
        terminalreporter.section("acceptance criteria")
        for n in sorted(log):
            terminalreporter.write_line(log[n])
