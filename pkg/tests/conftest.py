import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "numeric", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("numeric")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)



def pytest_terminal_summary(terminalreporter):
    from .acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[num])
