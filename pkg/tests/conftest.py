import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from isodist.states import Spectrum

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SPECTRA = [
    Spectrum((0.7, 0.3)),
    Spectrum((0.5, 0.5)),
    Spectrum((0.5, 0.3, 0.2)),
    Spectrum((0.5, 0.25, 0.25)),
    Spectrum((0.4, 0.3, 0.2, 0.1)),
]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=SPECTRA, ids=lambda s: ",".join(f"{v:g}" for v in s.values))
def sigma(request):
    return request.param


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_lines():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for text in _ACCEPTANCE_LINES:
            terminalreporter.write_line(text)
